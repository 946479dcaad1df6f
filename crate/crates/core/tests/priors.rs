use chartfit::geometry::{procedural_shape, sample_mesh, PointCloud, ShapeKind, ShapeParams};
use chartfit::priors::{
    fit_atlas, fit_levelset, make_atlas, stretch_loss, AtlasSpec, ChartKind, FitConfig,
    GridTopology, LevelSetModel,
};

#[test]
fn unit_circle_is_fitted_closely() {
    let circle: Vec<f64> = (0..1024)
        .flat_map(|i| {
            let t = i as f64 / 1024.0 * std::f64::consts::TAU;
            [t.cos(), t.sin()]
        })
        .collect();
    let target = PointCloud::new(2, circle).unwrap();
    let spec = AtlasSpec::new(1, 1, 2, ChartKind::Mlp).with_points(1024);
    let mut atlas = make_atlas(&spec, 0).unwrap();
    let cfg = FitConfig {
        lambda: 0.0,
        iterations: 2000,
        ..FitConfig::default()
    };
    let history = fit_atlas(&mut atlas, &target, &cfg).unwrap();
    let last = *history.chamfer.last().unwrap();
    assert!(last < 1e-4, "final chamfer {last}");
}

#[test]
fn stretch_is_quadratic_in_scale() {
    let topo = GridTopology::grid(5, 7);
    let coords: Vec<f64> = (0..35)
        .flat_map(|p| {
            let (i, j) = ((p / 7) as f64, (p % 7) as f64);
            [0.1 * i + 0.02 * j * j, 0.15 * j, 0.05 * i * j]
        })
        .collect();
    let base = PointCloud::new(3, coords.clone()).unwrap();
    let scaled = PointCloud::new(3, coords.iter().map(|v| 2.5 * v).collect()).unwrap();
    let (a, _) = stretch_loss(&base, &topo).unwrap();
    let (b, _) = stretch_loss(&scaled, &topo).unwrap();
    assert!((b - 6.25 * a).abs() < 1e-12 * b);
}

#[test]
fn levelset_signs_on_sphere() {
    let sphere = procedural_shape(ShapeKind::Sphere, &ShapeParams::default_for(ShapeKind::Sphere))
        .unwrap();
    let target = sample_mesh(&sphere, 2000, 1).unwrap();
    let cfg = FitConfig {
        iterations: 300,
        ..FitConfig::default()
    };
    let model = fit_levelset(&target, LevelSetModel::DEFAULT_EPSILON, &cfg).unwrap();
    let center = model.evaluate(&[0.5, 0.5, 0.5]).unwrap()[0];
    assert!(center < 0.0, "center {center}");
    for corner in 0..8 {
        let p: Vec<f64> = (0..3).map(|a| ((corner >> a) & 1) as f64).collect();
        let v = model.evaluate(&p).unwrap()[0];
        assert!(v > 0.0, "corner {p:?}: {v}");
    }
}
