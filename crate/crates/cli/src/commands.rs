use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde::Serialize;

use patchnav::cloud::{load_cloud, save_cloud, CloudError};
use patchnav::eval::{
    generate_pairs, map_accuracy, run_benchmark, trajectory_metrics, write_pairs_csv,
    write_timings_csv, GroundTruth, MapAccuracyReport, TrajectoryReport,
};
use patchnav::map::build_map as build;
use patchnav::map::io::{load_map, save_map, write_obj, MapFileError};
use patchnav::opt::{optimize_stage1, optimize_stage2, write_log_csv, LogEntry};
use patchnav::pipeline::{plan_and_optimize, PlanError};
use patchnav::search::{io as traj_io, Pose, SearchError};
use patchnav::{CloudFormat, MultiLevelMap, PointCloud, Trajectory};

use crate::config::Config;
use crate::{exit, Failure};

type CmdResult = Result<(), Failure>;

fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::new(exit::CONFIG, e)
}

fn format_of(path: &Path) -> Result<CloudFormat, Failure> {
    CloudFormat::from_path(path).ok_or_else(|| {
        config_error(anyhow!(
            "{}: unknown cloud format, use .xyz, .ply or .pcd",
            path.display()
        ))
    })
}

fn read_cloud_file(path: &Path) -> Result<PointCloud, Failure> {
    load_cloud(path, format_of(path)?).map_err(|e| {
        let code = if matches!(e, CloudError::Io(_)) {
            1
        } else {
            exit::CONFIG
        };
        Failure::new(
            code,
            anyhow::Error::from(e).context(format!("loading {}", path.display())),
        )
    })
}

fn read_map(path: &Path) -> Result<MultiLevelMap, Failure> {
    load_map(path).map_err(|e| {
        let code = if matches!(e, MapFileError::Io(_)) {
            1
        } else {
            exit::CONFIG
        };
        Failure::new(
            code,
            anyhow::Error::from(e).context(format!("loading {}", path.display())),
        )
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json_file(path: &Path, value: &impl Serialize) -> CmdResult {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(anyhow::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_traj(path: &Path, traj: &Trajectory, map: &MultiLevelMap) -> CmdResult {
    let mut out = create(path)?;
    traj_io::write_csv(traj, map, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_log(path: &Path, log: &[LogEntry]) -> CmdResult {
    let mut out = create(path)?;
    write_log_csv(log, &mut out)?;
    out.flush()?;
    Ok(())
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{ext}"))
}

pub fn gen_scene(config: &Config, out: &Path, truth: Option<&Path>) -> CmdResult {
    let format = format_of(out)?;
    let truth_format = truth.map(format_of).transpose()?;
    let cloud = config.scene.generate(true);
    save_cloud(out, &cloud, format).map_err(anyhow::Error::from)?;
    if let (Some(path), Some(f)) = (truth, truth_format) {
        save_cloud(path, &config.scene.generate(false), f).map_err(anyhow::Error::from)?;
    }
    println!("wrote {} points to {}", cloud.len(), out.display());
    Ok(())
}

pub fn build_map(
    config: &Config,
    cloud_path: &Path,
    out: &Path,
    obj: Option<&Path>,
    truth: Option<&Path>,
    report: Option<&Path>,
) -> CmdResult {
    let cloud = read_cloud_file(cloud_path)?;
    let truth_cloud = truth.map(read_cloud_file).transpose()?;
    let clock = Instant::now();
    let map = build(&cloud, &config.map).map_err(config_error)?;
    let t_c = clock.elapsed().as_secs_f64();
    if map.traversable_count() == 0 {
        return Err(Failure::new(
            exit::EMPTY_MAP,
            anyhow!("the map has no traversable patches"),
        ));
    }
    let obj_path = obj
        .map(Path::to_path_buf)
        .unwrap_or_else(|| with_extension(out, "obj"));
    for p in [out, obj_path.as_path()] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
    }
    save_map(&map, out, Some(&obj_path)).map_err(anyhow::Error::from)?;
    println!(
        "built {} patches ({} traversable) from {} points in {:.3} s",
        map.len(),
        map.traversable_count(),
        cloud.len(),
        t_c
    );
    if let Some(truth) = truth_cloud {
        let acc = map_accuracy(&map, &GroundTruth::Cloud(&truth));
        let path = report
            .map(Path::to_path_buf)
            .unwrap_or_else(|| with_extension(out, "accuracy.json"));
        write_json_file(&path, &acc)?;
        println!(
            "E_avg {:.4} m over {} patches",
            acc.e_avg,
            acc.per_patch.len()
        );
    }
    Ok(())
}

fn parse_pose(s: &str, what: &str) -> Result<Pose, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| config_error(anyhow!("{what} `{s}`: {e}")))?;
    match v[..] {
        [x, y, z] => Ok(Pose::new(x, y, z)),
        [x, y, z, yaw] => Ok(Pose { x, y, z, yaw }),
        _ => Err(config_error(anyhow!(
            "{what} `{s}`: expected x,y,z or x,y,z,yaw"
        ))),
    }
}

#[derive(Serialize)]
struct PlanReport {
    planning_seconds: f64,
    expansions: usize,
    stage1_iterations: usize,
    stage1_initial_objective: f64,
    stage1_final_objective: f64,
    initial: TrajectoryReport,
    stage1: TrajectoryReport,
    optimized: TrajectoryReport,
}

pub fn plan(
    config: &Config,
    map_path: &Path,
    start: &str,
    goal: &str,
    out_dir: &Path,
) -> CmdResult {
    let (start, goal) = (parse_pose(start, "start")?, parse_pose(goal, "goal")?);
    let map = read_map(map_path)?;
    let clock = Instant::now();
    let plan = plan_and_optimize(&map, start, goal, &config.robot, &config.opt).map_err(|e| {
        let code = match e {
            PlanError::Search(SearchError::InvalidStart | SearchError::InvalidGoal) => exit::SNAP,
            PlanError::Search(SearchError::Infeasible { .. }) => exit::INFEASIBLE,
            _ => 1,
        };
        Failure::new(code, e)
    })?;
    let t_p = clock.elapsed().as_secs_f64();
    fs::create_dir_all(out_dir)?;
    write_traj(&out_dir.join("initial.csv"), &plan.search.trajectory, &map)?;
    write_traj(&out_dir.join("stage1.csv"), &plan.stage1.trajectory, &map)?;
    write_traj(&out_dir.join("stage2.csv"), &plan.stage2, &map)?;
    write_log(&out_dir.join("log.csv"), &plan.log())?;
    let r = config.bench.safety_radius;
    let report = PlanReport {
        planning_seconds: t_p,
        expansions: plan.search.expansions,
        stage1_iterations: plan.stage1.iterations,
        stage1_initial_objective: plan.stage1.initial_objective,
        stage1_final_objective: plan.stage1.final_objective,
        initial: trajectory_metrics(&plan.search.trajectory, &map, r),
        stage1: trajectory_metrics(&plan.stage1.trajectory, &map, r),
        optimized: trajectory_metrics(&plan.stage2, &map, r),
    };
    write_json_file(&out_dir.join("report.json"), &report)?;
    println!(
        "planned {:.1} s trajectory, length {:.2} m, in {:.3} s ({} expansions)",
        plan.search.total_time(),
        report.optimized.length,
        t_p,
        plan.search.expansions
    );
    Ok(())
}

pub fn optimize(config: &Config, map_path: &Path, traj_path: &Path, out_dir: &Path) -> CmdResult {
    let map = read_map(map_path)?;
    let file = File::open(traj_path).with_context(|| format!("opening {}", traj_path.display()))?;
    let traj = traj_io::read_csv(BufReader::new(file), &map).map_err(config_error)?;
    let stage1 = optimize_stage1(&map, &traj, &config.opt).map_err(anyhow::Error::from)?;
    let (stage2, log2) =
        optimize_stage2(&map, &stage1.trajectory, &config.opt).map_err(anyhow::Error::from)?;
    fs::create_dir_all(out_dir)?;
    write_traj(&out_dir.join("stage1.csv"), &stage1.trajectory, &map)?;
    write_traj(&out_dir.join("stage2.csv"), &stage2, &map)?;
    let log: Vec<LogEntry> = stage1.log.iter().chain(&log2).copied().collect();
    write_log(&out_dir.join("log.csv"), &log)?;
    println!(
        "stage 1: objective {:.4} -> {:.4} in {} iterations; {} waypoints after stage 2",
        stage1.initial_objective,
        stage1.final_objective,
        stage1.iterations,
        stage2.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    num_patches: usize,
    num_traversable: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_avg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<MapAccuracyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<TrajectoryReport>,
}

pub fn eval(
    config: &Config,
    map_path: &Path,
    traj: Option<&Path>,
    truth: Option<&Path>,
    out: Option<&Path>,
) -> CmdResult {
    let map = read_map(map_path)?;
    let accuracy = match truth {
        Some(p) => Some(map_accuracy(
            &map,
            &GroundTruth::Cloud(&read_cloud_file(p)?),
        )),
        None => None,
    };
    let trajectory = match traj {
        Some(p) => {
            let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let t = traj_io::read_csv(BufReader::new(file), &map).map_err(config_error)?;
            if t.len() < 2 {
                return Err(config_error(anyhow!(
                    "{}: need at least two waypoints",
                    p.display()
                )));
            }
            Some(trajectory_metrics(&t, &map, config.bench.safety_radius))
        }
        None => None,
    };
    let report = EvalReport {
        num_patches: map.len(),
        num_traversable: map.traversable_count(),
        e_avg: accuracy.as_ref().map(|a| a.e_avg),
        accuracy,
        trajectory,
    };
    match out {
        Some(p) => write_json_file(p, &report),
        None => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
            );
            Ok(())
        }
    }
}

pub fn bench(config: &Config, map_path: &Path, out_dir: &Path) -> CmdResult {
    let map = read_map(map_path)?;
    let b = &config.bench;
    let pairs = generate_pairs(&map, b.pairs, b.seed, b.clearance);
    let report = run_benchmark(&map, &pairs, &config.robot, &config.opt, b.safety_radius);
    fs::create_dir_all(out_dir)?;
    let mut out = create(&out_dir.join("pairs.csv"))?;
    write_pairs_csv(&report, &mut out)?;
    out.flush()?;
    let mut out = create(&out_dir.join("timings.csv"))?;
    write_timings_csv(&report, &mut out)?;
    out.flush()?;
    write_json_file(&out_dir.join("summary.json"), &report.summary)?;
    let s = &report.summary;
    match s.success_rate {
        Some(p) => println!(
            "P = {p:.2} ({}/{}), median T_p {:.3} s, mean L {:.2} m, mean kappa {:.3} 1/m",
            s.successes,
            s.n_pairs,
            s.median_tp_seconds.unwrap_or(f64::NAN),
            s.mean_length.unwrap_or(f64::NAN),
            s.mean_curvature.unwrap_or(f64::NAN)
        ),
        None => println!("no pairs run"),
    }
    Ok(())
}

pub fn export(
    map_path: &Path,
    obj: Option<&Path>,
    traj: Option<&Path>,
    traj_json: Option<&Path>,
) -> CmdResult {
    let map = read_map(map_path)?;
    if let Some(p) = obj {
        let mut out = create(p)?;
        write_obj(&map, &mut out)?;
        out.flush()?;
    }
    match (traj, traj_json) {
        (Some(src), Some(dst)) => {
            let file = File::open(src).with_context(|| format!("opening {}", src.display()))?;
            let t = traj_io::read_csv(BufReader::new(file), &map).map_err(config_error)?;
            let mut out = create(dst)?;
            traj_io::write_json(&t, &map, &mut out).map_err(anyhow::Error::from)?;
            out.flush()?;
        }
        (None, None) => {}
        _ => return Err(config_error(anyhow!("--traj and --traj-json go together"))),
    }
    Ok(())
}
