mod common;

use std::path::Path;

use common::small_config;
use toonforge::geometry::{compute_vertex_normals, laplacian_smooth, normalize_to_unit_box, obj};
use toonforge::isosurface::{generate_uv_atlas, marching_tetrahedra, sample_grid, scene, SdfGrid};
use toonforge::metrics::{chamfer_distance, psnr_mse, ssim};
use toonforge::pipeline::{
    self, evaluate, EvalInputs, PipelineConfig, RefineInputs, RunManifest, MANIFEST_NAME,
};
use toonforge::raster::{rasterize, rasterize_uv_space, Image};
use toonforge::{Error, Vec3};

fn assert_manifest_complete(dir: &Path, manifest: &RunManifest) {
    let listed: Vec<String> = manifest.outputs.iter().map(|f| f.path.clone()).collect();
    for f in common::list_files(dir) {
        let name = f.to_string_lossy().into_owned();
        assert!(listed.contains(&name), "{name} missing from manifest in {}", dir.display());
    }
    for rec in &manifest.outputs {
        if rec.path != MANIFEST_NAME {
            assert_eq!(rec.sha256, pipeline::sha256_file(&dir.join(&rec.path)).unwrap());
        }
    }
}

fn load_views(dir: &Path, config: &PipelineConfig) -> Vec<Image> {
    pipeline::view_paths(dir, config).iter().map(|p| Image::load_png(p).unwrap()).collect()
}

#[test]
fn sphere_views_match_under_horizontal_flip() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let m = pipeline::synth("sphere", &config, dir.path()).unwrap();
    assert_manifest_complete(dir.path(), &m);
    let views = load_views(dir.path(), &config);
    let reference = &views[0];
    let w = reference.width;
    for v in &views[1..] {
        let flipped = v.flip_horizontal();
        for y in 0..w {
            for x in 0..w {
                let i = y * w + x;
                let same = (flipped.alpha[i] - reference.alpha[i]).abs() < 1e-9
                    && (0..3).all(|c| (flipped.rgb[i][c] - reference.rgb[i][c]).abs() < 2.0 / 255.0);
                if same {
                    continue;
                }
                // Differences are allowed only within one pixel of the silhouette.
                let near_edge = (-1i64..=1).any(|dy| {
                    (-1i64..=1).any(|dx| {
                        let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                        (0..w as i64).contains(&xx)
                            && (0..w as i64).contains(&yy)
                            && (reference.alpha[yy as usize * w + xx as usize] > 0.5) != (reference.alpha[i] > 0.5)
                    })
                });
                assert!(near_edge, "pixel ({x}, {y}) differs away from the silhouette");
            }
        }
    }
}

#[test]
fn blob_front_and_back_views_differ() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("blob_character", &config, dir.path()).unwrap();
    let views = load_views(dir.path(), &config);
    let back = views[2].flip_horizontal();
    let diff: f64 = views[0]
        .rgb
        .iter()
        .zip(&back.rgb)
        .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).abs()).sum::<f64>())
        .sum();
    assert!(diff > 0.0);
}

#[test]
fn nested_inner_sphere_is_never_visible() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("nested_spheres", &config, dir.path()).unwrap();
    let views = load_views(dir.path(), &config);

    let n = config.synth.grid_resolution;
    let spacing = 2.0 * pipeline::SYNTH_DOMAIN / (n - 1) as f64;
    let grid = sample_grid(&scene::outer_sphere(), [n; 3], Vec3::repeat(-pipeline::SYNTH_DOMAIN), spacing).unwrap();
    let (unit, _) = normalize_to_unit_box(&marching_tetrahedra(&grid)).unwrap();
    let outer = laplacian_smooth(&unit, config.smoothing.iterations, config.smoothing.lambda);
    for (view, cam) in views.iter().zip(config.camera.cameras().unwrap()) {
        let mask = rasterize(&outer, &cam).mask();
        assert_eq!(view.mask(), mask);
    }
}

#[test]
fn unknown_fixture_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = pipeline::synth("teapot", &small_config(), dir.path()).unwrap_err();
    assert!(matches!(err, Error::UnknownFixture(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn extract_sphere_is_closed_with_coarse_texture() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("sphere", &config, &dir.path().join("gt")).unwrap();
    let out = dir.path().join("ex");
    let m = pipeline::extract(&dir.path().join("gt/grid.sdfg"), &config, &out).unwrap();
    assert_manifest_complete(&out, &m);
    let mesh = obj::read_obj(&out.join("mesh.obj")).unwrap();
    let mut edges = std::collections::HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    assert!(edges.values().all(|&c| c == 2));
    let chi = mesh.positions.len() as i64 - edges.len() as i64 + mesh.triangles.len() as i64;
    assert_eq!(chi, 2);
    let coarse = Image::load_png(&out.join("coarse_texture.png")).unwrap();
    let (texels, _) = rasterize_uv_space(&mesh, coarse.width);
    let covered = (0..texels.len()).filter(|&i| texels.valid[i]).count();
    assert!(covered > 0);
    // Constant-colored sphere bakes to a constant texture.
    for i in (0..texels.len()).filter(|&i| texels.valid[i]) {
        for (c, want) in [0.85, 0.45, 0.25].into_iter().enumerate() {
            assert!((coarse.rgb[i][c] - want).abs() <= 1.0 / 255.0);
        }
    }
}

#[test]
fn extract_without_surface_fails() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SdfGrid::new([4; 3], Vec3::zeros(), 0.1, vec![1.0; 64], None).unwrap();
    let path = dir.path().join("grid.sdfg");
    grid.save(&path).unwrap();
    let err = pipeline::extract(&path, &small_config(), &dir.path().join("out")).unwrap_err();
    assert!(err.to_string().contains("no surface crossing"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn extract_without_color_volume_skips_coarse_texture() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = scene::sphere_fixture(0.3);
    let mut grid = sample_grid(&sphere, [24; 3], Vec3::repeat(-0.5), 1.0 / 23.0).unwrap();
    grid.color = None;
    let path = dir.path().join("grid.sdfg");
    grid.save(&path).unwrap();
    let out = dir.path().join("out");
    let m = pipeline::extract(&path, &small_config(), &out).unwrap();
    assert!(!out.join("coarse_texture.png").exists());
    assert_eq!(m.stats["coarse_texture"], serde_json::json!(false));
    assert!(!m.warnings.is_empty());
    assert!(out.join("mesh.obj").exists() && out.join("texels.bin").exists());
}

/// Extract, then render views from the extracted mesh with its own coarse texture.
fn self_consistent_setup(root: &Path, config: &PipelineConfig) -> RefineInputs {
    pipeline::synth("blob_character", config, &root.join("gt")).unwrap();
    pipeline::extract(&root.join("gt/grid.sdfg"), config, &root.join("ex")).unwrap();
    pipeline::render(
        &root.join("ex/mesh.obj"),
        &root.join("ex/coarse_texture.png"),
        &[],
        config,
        &root.join("views"),
    )
    .unwrap();
    RefineInputs {
        mesh: root.join("ex/mesh.obj"),
        coarse_texture: root.join("ex/coarse_texture.png"),
        views: pipeline::view_paths(&root.join("views"), config),
        texel_cache: Some(root.join("ex/texels.bin")),
    }
}

fn masked_psnr(a: &Image, b: &Image, mask: &[bool]) -> f64 {
    psnr_mse(a, b, Some(mask)).unwrap().psnr
}

#[test]
fn refine_with_own_renders_reproduces_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let inputs = self_consistent_setup(dir.path(), &config);
    let out = dir.path().join("rf");
    let m = pipeline::refine(&inputs, &config, &out).unwrap();
    assert_manifest_complete(&out, &m);
    let refined = Image::load_png(&out.join("refined_texture.png")).unwrap();
    let coarse = Image::load_png(&inputs.coarse_texture).unwrap();
    let projected = Image::load_png(&out.join("projected.png")).unwrap();
    let mask = projected.mask();
    assert!(mask.iter().any(|&m| m));
    assert!(masked_psnr(&refined, &coarse, &mask) >= 35.0);
    let stats = &m.stats["texels"];
    let projected_n = stats["candidates_projected"].as_u64().unwrap();
    let kept = stats["candidates_kept"].as_u64().unwrap();
    assert_eq!(projected_n - kept, stats["candidates_culled"].as_u64().unwrap());
}

#[test]
fn threshold_below_minus_one_keeps_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config();
    let inputs = self_consistent_setup(dir.path(), &config);
    config.projection.silhouette_threshold = -1.01;
    let out = dir.path().join("rf");
    let m = pipeline::refine(&inputs, &config, &out).unwrap();
    assert_eq!(m.stats["texels"]["candidates_kept"], serde_json::json!(0));
    assert_eq!(m.stats["texels"]["blend"]["trivial"], serde_json::json!(true));
    let refined = Image::load_png(&out.join("refined_texture.png")).unwrap();
    let coarse = Image::load_png(&inputs.coarse_texture).unwrap();
    let diff: Vec<usize> = (0..refined.rgb.len()).filter(|&i| refined.rgb[i] != coarse.rgb[i]).collect();
    assert!(diff.is_empty(), "{} texels differ, first {:?}: {:?} vs {:?}", diff.len(), diff[0], refined.rgb[diff[0]], coarse.rgb[diff[0]]);
    assert!(Image::load_png(&out.join("projected.png")).unwrap().mask().iter().all(|&m| !m));
}

#[test]
fn refine_without_cache_matches_cached_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let mut inputs = self_consistent_setup(dir.path(), &config);
    pipeline::refine(&inputs, &config, &dir.path().join("a")).unwrap();
    inputs.texel_cache = None;
    pipeline::refine(&inputs, &config, &dir.path().join("b")).unwrap();
    for f in ["refined_texture.png", "projected.png", "refined.obj"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn stale_texel_cache_is_rebuilt_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let mut inputs = self_consistent_setup(dir.path(), &config);
    pipeline::synth("sphere", &config, &dir.path().join("gt2")).unwrap();
    pipeline::extract(&dir.path().join("gt2/grid.sdfg"), &config, &dir.path().join("ex2")).unwrap();
    inputs.texel_cache = Some(dir.path().join("ex2/texels.bin"));
    let m = pipeline::refine(&inputs, &config, &dir.path().join("rf")).unwrap();
    assert!(m.warnings.iter().any(|w| w.contains("different mesh")));
}

#[test]
fn refine_rejects_wrong_view_count_and_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let mut inputs = self_consistent_setup(dir.path(), &config);
    let all = inputs.views.clone();
    inputs.views.truncate(3);
    assert!(pipeline::refine(&inputs, &config, &dir.path().join("rf")).is_err());
    inputs.views = all;
    Image::new(64, 64, [0.0; 3], 1.0).save_png(&inputs.views[1]).unwrap();
    let err = pipeline::refine(&inputs, &config, &dir.path().join("rf")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn refine_reports_solver_failure_as_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config();
    let inputs = self_consistent_setup(dir.path(), &config);
    config.solver.max_iterations = Some(1);
    let err = pipeline::refine(&inputs, &config, &dir.path().join("rf")).unwrap_err();
    assert!(err.is_numerical(), "{err}");
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("blend"), "{err}");
}

#[test]
fn render_constant_texture_and_full_turn() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("sphere", &config, &dir.path().join("gt")).unwrap();
    let tex = Image::new(64, 64, [0.2, 0.6, 0.4], 1.0);
    tex.save_png(&dir.path().join("flat.png")).unwrap();
    let out = dir.path().join("r");
    let m = pipeline::render(&dir.path().join("gt/gt_mesh.obj"), &dir.path().join("flat.png"), &[0.0, 360.0], &config, &out)
        .unwrap();
    assert_manifest_complete(&out, &m);
    let zero = std::fs::read(out.join("view_0.png")).unwrap();
    assert_eq!(zero, std::fs::read(out.join("view_360.png")).unwrap());
    let img = Image::load_png(&out.join("view_0.png")).unwrap();
    let q = |v: f64| (v * 255.0).round() / 255.0;
    for i in 0..img.rgb.len() {
        let want = if img.alpha[i] > 0.5 { [0.2, 0.6, 0.4].map(q) } else { [1.0; 3] };
        assert_eq!(img.rgb[i], want);
    }
}

#[test]
fn render_golden_hash() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("capsule", &config, &dir.path().join("gt")).unwrap();
    let out = dir.path().join("r");
    pipeline::render(
        &dir.path().join("gt/gt_mesh.obj"),
        &dir.path().join("gt/gt_texture.png"),
        &[30.0],
        &config,
        &out,
    )
    .unwrap();
    let hash = pipeline::sha256_file(&out.join("view_30.png")).unwrap();
    assert_eq!(hash, GOLDEN_CAPSULE_VIEW_30);
}

const GOLDEN_CAPSULE_VIEW_30: &str = "e7f5ddcd20508ef840e947a027ff21ae408235c0724b664b2ca5226e8a5b5300";

#[test]
fn render_needs_uvs() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = scene::sphere_fixture(0.3);
    let grid = sample_grid(&sphere, [16; 3], Vec3::repeat(-0.5), 1.0 / 15.0).unwrap();
    let mesh = marching_tetrahedra(&grid);
    obj::write_obj(&dir.path().join("m.obj"), &mesh, None).unwrap();
    Image::new(8, 8, [0.5; 3], 1.0).save_png(&dir.path().join("t.png")).unwrap();
    let err = pipeline::render(&dir.path().join("m.obj"), &dir.path().join("t.png"), &[], &small_config(), dir.path())
        .unwrap_err();
    assert!(err.to_string().contains("UV"), "{err}");
}

#[test]
fn eval_self_comparison_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    pipeline::synth("blob_character", &config, &dir.path().join("gt")).unwrap();
    let gt = dir.path().join("gt");
    let inputs = EvalInputs {
        mesh_a: Some(gt.join("gt_mesh.obj")),
        mesh_b: Some(gt.join("gt_mesh.obj")),
        views_a: pipeline::view_paths(&gt, &config),
        views_b: pipeline::view_paths(&gt, &config),
    };
    let out = dir.path().join("eval");
    let (report, m) = pipeline::eval(&inputs, &config, &out).unwrap();
    assert_manifest_complete(&out, &m);
    assert_eq!(report.mesh.unwrap().chamfer, 0.0);
    assert_eq!(report.views.len(), 4);
    for row in &report.views {
        assert_eq!(row.ssim, 1.0);
        assert!(row.psnr.is_infinite());
        assert_eq!(row.mse, 0.0);
    }
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kind,azimuth,chamfer,psnr,mse,ssim");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("mesh,"));
    assert!(lines[2..].iter().all(|l| l.starts_with("view,")));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["views"][0]["psnr"], serde_json::json!("inf"));
    assert_eq!(json["seed"], serde_json::json!(config.seed));
}

#[test]
fn eval_agrees_with_direct_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let inputs = self_consistent_setup(dir.path(), &config);
    let gt = dir.path().join("gt");
    let eval_inputs = EvalInputs {
        mesh_a: Some(gt.join("gt_mesh.obj")),
        mesh_b: Some(inputs.mesh.clone()),
        views_a: pipeline::view_paths(&gt, &config),
        views_b: inputs.views.clone(),
    };
    let (report, _) = pipeline::eval(&eval_inputs, &config, &dir.path().join("eval")).unwrap();

    let a = obj::read_obj(&gt.join("gt_mesh.obj")).unwrap();
    let b = obj::read_obj(&inputs.mesh).unwrap();
    assert_eq!(report.mesh.unwrap().chamfer, chamfer_distance(&a, &b, config.eval.samples, config.seed).unwrap());
    let va = load_views(&gt, &config);
    let vb: Vec<Image> = inputs.views.iter().map(|p| Image::load_png(p).unwrap()).collect();
    for ((row, x), y) in report.views.iter().zip(&va).zip(&vb) {
        let mask: Vec<bool> = x.alpha.iter().zip(&y.alpha).map(|(&p, &q)| p > 0.5 || q > 0.5).collect();
        let pm = psnr_mse(x, y, Some(&mask)).unwrap();
        assert_eq!(row.psnr, pm.psnr);
        assert_eq!(row.mse, pm.mse);
        assert_eq!(row.ssim, ssim(x, y).unwrap());
    }
    let refs: Vec<_> = config.camera.azimuths.iter().zip(va.iter().zip(&vb)).map(|(&az, (x, y))| (az, x, y)).collect();
    assert_eq!(evaluate(Some((&a, &b)), &refs, &config).unwrap(), report);
}

#[test]
fn eval_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let out = dir.path().join("eval");
    assert!(pipeline::eval(&EvalInputs::default(), &config, &out).is_err());
    let half = EvalInputs {
        mesh_a: Some(dir.path().join("a.obj")),
        ..Default::default()
    };
    assert!(pipeline::eval(&half, &config, &out).is_err());
}

#[test]
fn schedule_command_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = pipeline::schedule(&pipeline::ScheduleParams::default(), &PipelineConfig::default(), dir.path()).unwrap();
    assert_manifest_complete(dir.path(), &m);
    let csv = std::fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "t,beta,alpha_bar,snr");
    assert_eq!(*lines.last().unwrap(), "999,1,0,0");
}

#[test]
fn in_memory_refine_matches_file_refine() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let inputs = self_consistent_setup(dir.path(), &config);
    pipeline::refine(&inputs, &config, &dir.path().join("rf")).unwrap();

    let mesh = obj::read_obj(&inputs.mesh).unwrap();
    let mesh = if mesh.has_normals() { mesh } else { compute_vertex_normals(&mesh).0 };
    let coarse = Image::load_png(&inputs.coarse_texture).unwrap();
    let (mut texels, _) = rasterize_uv_space(&mesh, coarse.width);
    toonforge::pipeline::cache::quantize(&mut texels);
    texels.attach_coarse(&coarse).unwrap();
    let views = inputs.views.iter().map(|p| Image::load_png(p).unwrap()).collect();
    let result = pipeline::refine_in_memory(&mesh, &texels, views, &config).unwrap();
    let on_disk = Image::load_png(&dir.path().join("rf/projected.png")).unwrap();
    assert_eq!(on_disk.mask(), result.mask);
}

#[test]
fn atlas_of_extracted_mesh_round_trips_through_obj() {
    let sphere = scene::capsule_fixture();
    let grid = sample_grid(&sphere, [32; 3], Vec3::repeat(-0.55), 1.1 / 31.0).unwrap();
    let (unit, _) = normalize_to_unit_box(&marching_tetrahedra(&grid)).unwrap();
    let mesh = generate_uv_atlas(&compute_vertex_normals(&unit).0, 256).unwrap();
    let back = obj::parse_obj(&obj::to_obj_string(&mesh, None)).unwrap();
    assert_eq!(back.triangles.len(), mesh.triangles.len());
    assert_eq!(back.chart_ids, mesh.chart_ids);
}
