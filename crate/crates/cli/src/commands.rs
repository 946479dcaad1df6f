use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::anyhow;
use chartfit::geometry::io::{format_number, read_obj, write_atomic, write_obj};
use chartfit::geometry::{
    chamfer, normalize_to_unit_cube, perturb, procedural_shape, sample_mesh,
    subsample, PointCloud, ShapeKind, ShapeParams, TriangleMesh,
};
use chartfit::gp::{
    self, check_cos_psi_decay, check_covariance, check_curvature_ks, correlated_pairs, draw_seed,
    mean_abs_curvature, network_arclength_curve, network_curve, network_surface, CurveRow,
    PriorNetSpec, VerifyEntry,
};
use chartfit::priors::{
    evaluation_chamfer, run_method, Method, PipelineConfig, PriorKind, BENCHMARK_METHODS,
};

use crate::data::{geometry_failure, load_points, metrics_csv, planar, prior_failure, MetricsRow};
use crate::{BenchArgs, FitArgs, Failure, GpArgs, KindArg, SampleArgs};

fn check_finite_non_negative(name: &str, v: f64) -> Result<(), Failure> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Failure::usage(format!("--{name} must be a non-negative number, got {v}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: usize) -> Result<(), Failure> {
    if v == 0 {
        return Err(Failure::usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).map_err(geometry_failure)
}

fn shape_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

pub fn denoise(args: &FitArgs, interpolate: bool) -> Result<(), Failure> {
    check_positive("charts", args.charts)?;
    check_positive("iters", args.iters)?;
    check_positive("eval-samples", args.eval_samples)?;
    check_finite_non_negative("lambda", args.lambda)?;
    if let Some(n) = args.noise {
        check_finite_non_negative("noise", n)?;
    }
    let subsample_to = match (args.subsample, interpolate) {
        (Some(n), _) => Some(n),
        (None, true) => Some(1024),
        (None, false) => None,
    };
    if let Some(n) = subsample_to {
        check_positive("subsample", n)?;
    }
    let method = match (args.kind, args.dim, interpolate) {
        (KindArg::Levelset, _, _) => Method::new(PriorKind::Implicit, 1, 0.0),
        (KindArg::Conv, 1, _) => {
            return Err(Failure::usage("convolutional charts need --dim 2"));
        }
        (KindArg::Conv, _, true) => Method::new(PriorKind::Conv, 1, args.lambda),
        (KindArg::Conv, _, false) => Method::new(PriorKind::Conv, args.charts, args.lambda),
        (KindArg::Mlp, dim, _) => Method::new(
            if dim == 1 { PriorKind::Contour } else { PriorKind::Surface },
            if interpolate { 1 } else { args.charts },
            args.lambda,
        ),
    };

    let (mut cloud, _) = load_points(&args.input, args.eval_samples, args.seed)?;
    if let Some(sigma) = args.noise {
        cloud = perturb(&cloud, sigma, draw_seed(args.seed, 1)).map_err(geometry_failure)?;
    }
    if let Some(n) = subsample_to {
        if n > cloud.len() {
            return Err(Failure::usage(format!(
                "--subsample {n} exceeds the {} input points",
                cloud.len()
            )));
        }
        cloud = subsample(&cloud, n, draw_seed(args.seed, 2)).map_err(geometry_failure)?;
    }
    if method.kind == PriorKind::Contour {
        if let Some(flat) = planar(&cloud) {
            cloud = flat;
        }
    }

    let cfg = PipelineConfig {
        iterations: args.iters,
        seed: args.seed,
        ..PipelineConfig::default()
    };
    let rec = run_method(&method, &cloud, &cfg).map_err(prior_failure)?;
    write_obj(&args.out, &rec.mesh).map_err(geometry_failure)?;

    let (mut chamfer_eval, mut baseline) = (None, None);
    if let Some(gt_path) = &args.ground_truth {
        let (mut gt, _) = load_points(gt_path, args.eval_samples, draw_seed(args.seed, 3))?;
        if cloud.dim() == 2 {
            gt = gt.truncate_dim(2).map_err(geometry_failure)?;
        }
        baseline = Some(chamfer(&cloud, &gt).map_err(geometry_failure)?.value);
        chamfer_eval = Some(
            evaluation_chamfer(&rec.mesh, &gt, args.eval_samples, draw_seed(args.seed, 4))
                .map_err(prior_failure)?,
        );
    }
    let row = MetricsRow {
        shape: shape_name(&args.input),
        config: method.to_string(),
        lambda: method.lambda,
        charts: method.charts,
        iters: args.iters,
        seed: args.seed,
        chamfer_eval,
        chamfer_noisy_baseline: baseline,
        overlap: rec.overlap().map_err(prior_failure)?,
        seconds: rec.seconds,
    error: None,
    };
    let metrics = args.out.with_extension("csv");
    write_text(&metrics, &metrics_csv(std::slice::from_ref(&row)))?;
    println!(
        "{}: {} faces, {} segments -> {}",
        method,
        rec.mesh.faces.len(),
        rec.mesh.segments.len(),
        args.out.display()
    );
    if let (Some(e), Some(b)) = (chamfer_eval, baseline) {
        println!("evaluation chamfer {e:.4e} (noisy input {b:.4e})");
    }
    Ok(())
}

/// Width used for networks with more than one hidden layer.
const DEEP_WIDTH: usize = 256;

pub fn gp_verify(args: &GpArgs) -> Result<(), Failure> {
    if args.depth == 0 {
        return Err(Failure::usage("--depth must be at least 1"));
    }
    if args.width < 64 {
        return Err(Failure::usage("--width must be at least 64"));
    }
    if args.draws < 1000 {
        eprintln!(
            "warning: {} draws are under-sampled; at least 1000 are needed, no pass claim is made",
            args.draws
        );
        return Err(Failure::Check(anyhow!("under-sampled run ({} draws)", args.draws)));
    }
    let pairs = correlated_pairs(25, args.seed);
    let mut entries: Vec<VerifyEntry> = Vec::new();
    for depth in 1..=args.depth {
        let width = if depth == 1 { args.width } else { args.width.min(DEEP_WIDTH) };
        eprintln!("covariance, {depth} hidden layer(s), width {width}, {} draws", args.draws);
        entries.extend(
            check_covariance(depth, width, args.draws, &pairs, 0.03, draw_seed(args.seed, depth as u64))
                .map_err(|e| Failure::Check(e.into()))?,
        );
    }
    let ys: Vec<Vec<f64>> = [0.25, 0.5, 1.0].iter().map(|&y| vec![y]).collect();
    entries.extend(check_cos_psi_decay(&[0.0], &ys, 6, 0.01).map_err(|e| Failure::Check(e.into()))?);
    entries.push(
        check_curvature_ks(512, 5000.min(args.draws), draw_seed(args.seed, 100))
            .map_err(|e| Failure::Check(e.into()))?,
    );

    if let Some(out) = &args.out {
        let mut csv = String::from("check,entry,value,reference,pass\n");
        for e in &entries {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                e.check,
                e.entry.replace(',', ";"),
                format_number(e.value),
                format_number(e.reference),
                e.pass
            ));
        }
        write_text(out, &csv)?;
    }
    let failed: Vec<&VerifyEntry> = entries.iter().filter(|e| !e.pass).collect();
    println!("{} of {} checks passed", entries.len() - failed.len(), entries.len());
    for e in &failed {
        println!("FAIL {} [{}]: {} vs {}", e.check, e.entry, e.value, e.reference);
    }
    match failed.first() {
        None => Ok(()),
        Some(e) => Err(Failure::Check(anyhow!("{} [{}] failed", e.check, e.entry))),
    }
}

/// Bias standard deviation of sampled prior networks.
const PRIOR_BIAS_STD: f64 = 0.01;
const CURVE_POINTS: usize = 1001;
const SURFACE_SIDE: usize = 64;

pub fn sample_prior(args: &SampleArgs) -> Result<(), Failure> {
    check_positive("depth", args.depth)?;
    check_positive("draws", args.draws)?;
    check_positive("width", args.width)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Usage(anyhow!("{}: {e}", args.out.display())))?;
    let spec = PriorNetSpec::relu(args.depth, args.width, PRIOR_BIAS_STD);
    let mut rows = Vec::new();
    for i in 0..args.draws {
        let seed = draw_seed(args.seed, i as u64);
        let path: PathBuf = args.out.join(format!("prior_d{}_{i:04}.obj", args.depth));
        let mesh = if args.dim == 2 {
            network_surface(&spec, SURFACE_SIDE, seed).map_err(|e| Failure::Check(e.into()))?
        } else {
            let curve = if args.arclength {
                network_arclength_curve(&spec, CURVE_POINTS, seed).map(|c| c.1)
            } else {
                network_curve(&spec, CURVE_POINTS, seed)
            }
            .map_err(|e| Failure::Check(e.into()))?;
            rows.push(CurveRow {
                input: i as f64,
                depth: args.depth,
                value: mean_abs_curvature(&curve),
            });
            let vertices = curve.iter().map(|p| [p[0], p[1], 0.0]).collect();
            let segments = (0..curve.len() - 1).map(|j| [j, j + 1]).collect();
            TriangleMesh::polyline(vertices, segments).map_err(geometry_failure)?
        };
        write_obj(&path, &mesh).map_err(geometry_failure)?;
    }
    if !rows.is_empty() {
        gp::write_curve_csv(&args.out.join("curvature.csv"), &rows)
            .map_err(|e| Failure::Usage(e.into()))?;
    }
    println!("wrote {} draw(s) to {}", args.draws, args.out.display());
    Ok(())
}

struct Shape {
    name: String,
    mesh: TriangleMesh,
}

fn benchmark_shapes(dir: Option<&Path>) -> Result<Vec<Shape>, Failure> {
    let Some(dir) = dir else {
        return ShapeKind::ALL
            .iter()
            .map(|&k| {
                let mesh = procedural_shape(k, &ShapeParams::default_for(k)).map_err(geometry_failure)?;
                Ok(Shape {
                    name: k.name().to_string(),
                    mesh,
                })
            })
            .collect();
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Usage(anyhow!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::usage(format!("{}: no .obj files", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            Ok(Shape {
                name: shape_name(p),
                mesh: read_obj(p).map_err(geometry_failure)?,
            })
        })
        .collect()
}

struct Cell<'a> {
    shape: &'a str,
    noisy: &'a PointCloud,
    reference: &'a PointCloud,
    baseline: f64,
    method: Method,
}

fn run_cell(cell: &Cell, args: &BenchArgs) -> MetricsRow {
    let mut row = MetricsRow {
        shape: cell.shape.to_string(),
        config: cell.method.to_string(),
        lambda: cell.method.lambda,
        charts: cell.method.charts,
        iters: args.iters,
        seed: args.seed,
        chamfer_eval: None,
        chamfer_noisy_baseline: Some(cell.baseline),
        overlap: None,
        seconds: 0.0,
        error: None,
    };
    let cfg = PipelineConfig {
        iterations: args.iters,
        seed: args.seed,
        ..PipelineConfig::default()
    };
    let result = run_method(&cell.method, cell.noisy, &cfg).and_then(|rec| {
        let e = evaluation_chamfer(&rec.mesh, cell.reference, args.eval_samples, draw_seed(args.seed, 4))?;
        Ok((rec.seconds, e, rec.overlap()?))
    });
    match result {
        Ok((seconds, e, overlap)) => {
            row.seconds = seconds;
            row.chamfer_eval = Some(e);
            row.overlap = overlap;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

pub fn benchmark(args: &BenchArgs) -> Result<(), Failure> {
    check_positive("iters", args.iters)?;
    check_positive("eval-samples", args.eval_samples)?;
    check_finite_non_negative("noise", args.noise)?;
    let shapes = benchmark_shapes(args.input.as_deref())?;
    let mut prepared = Vec::new();
    for s in &shapes {
        let mesh = normalize_to_unit_cube(&s.mesh).map_err(geometry_failure)?;
        let clean = sample_mesh(&mesh, args.eval_samples, draw_seed(args.seed, 10)).map_err(geometry_failure)?;
        let noisy = perturb(&clean, args.noise, draw_seed(args.seed, 11)).map_err(geometry_failure)?;
        let reference =
            sample_mesh(&mesh, args.eval_samples, draw_seed(args.seed, 12)).map_err(geometry_failure)?;
        let baseline = chamfer(&noisy, &reference).map_err(geometry_failure)?.value;
        prepared.push((s.name.clone(), noisy, reference, baseline));
    }
    let cells: Vec<Cell> = prepared
        .iter()
        .flat_map(|(name, noisy, reference, baseline)| {
            BENCHMARK_METHODS.iter().map(move |&method| Cell {
                shape: name,
                noisy,
                reference,
                baseline: *baseline,
                method,
            })
        })
        .collect();

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<MetricsRow>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let row = run_cell(cell, args);
                eprintln!(
                    "{} {}: {}",
                    row.shape,
                    row.config,
                    row.chamfer_eval
                        .map(|e| format!("{e:.4e}"))
                        .or_else(|| row.error.clone())
                        .unwrap_or_default()
                );
                results.lock().expect("results lock")[i] = Some(row);
            });
        }
    });
    let rows: Vec<MetricsRow> = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();
    write_text(&args.out, &metrics_csv(&rows))?;
    println!("{} cells -> {}", rows.len(), args.out.display());
    Ok(())
}
