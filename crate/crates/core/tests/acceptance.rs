//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

mod common;

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;
use std::time::Instant;

use adaptsel_core::adapter::*;
use adaptsel_core::config::AdapterConfig;
use adaptsel_core::geometry::*;
use adaptsel_core::objectives::*;
use adaptsel_core::scene::*;
use adaptsel_core::simulator::*;
use adaptsel_core::techniques::*;
use adaptsel_core::trace::{read_raw, replay, ReplayOutcome};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn convergence(out: &BatchOutput) -> Verdict {
    let mut counts: BTreeMap<EnvKind, (usize, usize)> = BTreeMap::new();
    for t in out.trials.iter().filter(|t| t.mode == TrialMode::Adaptive) {
        let expected = match t.scene.environment {
            EnvKind::Dense | EnvKind::Deep => Technique::RayCursor,
            EnvKind::Sparse | EnvKind::Flat => Technique::StickyRay,
        };
        let c = counts.entry(t.scene.environment).or_default();
        c.0 += usize::from(t.result.final_technique == expected);
        c.1 += 1;
    }
    // pooled over the environments that share an expected technique
    let pooled = |envs: [EnvKind; 2]| {
        envs.iter().fold((0, 0), |acc, e| {
            let (h, n) = counts.get(e).copied().unwrap_or_default();
            (acc.0 + h, acc.1 + n)
        })
    };
    let cursor = pooled([EnvKind::Dense, EnvKind::Deep]);
    let sticky = pooled([EnvKind::Sparse, EnvKind::Flat]);
    let ok = |(hit, n): (usize, usize)| n > 0 && hit as f64 >= 0.9 * n as f64;
    let per_env = counts
        .iter()
        .map(|(env, (hit, n))| format!("{env} {hit}/{n}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(
        ok(cursor) && ok(sticky) && counts.len() == 4,
        format!(
            "dense+deep RayCursor {}/{}, sparse+flat StickyRay {}/{} (per environment: {per_env})",
            cursor.0, cursor.1, sticky.0, sticky.1
        ),
    )
}

fn switch_economy(out: &BatchOutput) -> Verdict {
    let counts: Vec<usize> = out
        .trials
        .iter()
        .filter(|t| t.mode == TrialMode::Adaptive)
        .map(|t| t.result.switches.len())
        .collect();
    let switching: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    let mean = if switching.is_empty() {
        0.0
    } else {
        switching.iter().sum::<usize>() as f64 / switching.len() as f64
    };
    let max = counts.iter().copied().max().unwrap_or(0);
    verdict(
        mean <= 2.0 && max <= 4,
        format!(
            "{} switching trials, mean {mean:.3}, max {max}",
            switching.len()
        ),
    )
}

fn accuracy_oracle() -> Verdict {
    let params = EdModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = vec![(
        10.0,
        2.5,
        AccuracyBox {
            x1: -1.25,
            x2: 1.25,
            y1: 1.25,
            y2: -1.25,
        },
    )];
    while cases.len() < 100 {
        let p = random_disk_point(&mut rng, 20.0);
        let a = p.norm();
        let w = rng.gen_range(0.05..(20.0 - a).max(0.1));
        let u = rng.gen_range(0.0..1.0);
        let h = rng.gen_range(0.02..w.max(0.05));
        let bbox = AccuracyBox {
            x1: -u * w,
            x2: (1.0 - u) * w,
            y1: rng.gen_range(0.0..1.0) * h,
            y2: -h,
        };
        cases.push((a, w, bbox));
    }
    let worst = cases
        .iter()
        .map(|&(a, w, bbox)| {
            let region = ActivationRegion {
                target_id: TargetId(1),
                region: Polygon2D::empty(),
                width: w,
                amplitude: a,
                bbox,
                aim_center: AngularPoint::new(a, 0.0),
                selectable: true,
            };
            let (mu, sx, sy) = endpoint_model(a, w);
            let expected = box_mass_by_quadrature(bbox.x1, bbox.x2, bbox.y1, bbox.y2, mu, sx, sy);
            (score_accuracy(&region, &params) - expected).abs()
        })
        .fold(0.0, f64::max);
    verdict(
        worst < 1e-3,
        format!("100 cases, worst |error| {worst:.2e}"),
    )
}

fn geometry_oracles() -> Verdict {
    let v2 = [(20, 1), (240, 2)].map(|(n, s)| voronoi_2d_agreement(n, s));
    let v3 = [(10, 3), (240, 4)].map(|(n, s)| voronoi_3d_agreement(n, s));
    let voronoi_ok = v2.iter().chain(&v3).all(|&r| r >= 0.995);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_diff: f64 = 0.0;
    for _ in 0..40 {
        let r = rng.gen_range(3.0..8.0);
        let subject = ngon(
            AngularPoint::ORIGIN,
            r,
            rng.gen_range(5..40),
            rng.gen_range(0.0..1.0),
        );
        let clips: Vec<Polygon2D> = (0..rng.gen_range(1..4))
            .map(|_| {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let c = AngularPoint::new(r * a.cos(), r * a.sin());
                ngon(
                    c,
                    rng.gen_range(0.2..0.45) * r,
                    rng.gen_range(3..12),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        let refs: Vec<&Polygon2D> = clips.iter().collect();
        let got = polygon_difference(&subject, &refs).area();
        let expected = raster_difference(&subject, &clips, 700);
        worst_diff = worst_diff.max((got - expected).abs() / expected);
    }

    let mut hull_ok = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..60);
        let pts: Vec<AngularPoint> = (0..n).map(|_| random_disk_point(&mut rng, 20.0)).collect();
        let mut hull = convex_hull(&pts).vertices;
        hull.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.v.total_cmp(&b.v)));
        hull_ok += usize::from(hull == brute_hull(&pts));
    }
    verdict(
        voronoi_ok && worst_diff < 0.005 && hull_ok == 100,
        format!(
            "voronoi 2d {:.4}/{:.4}, 3d {:.4}/{:.4}; difference worst {:.3}%; hull {hull_ok}/100",
            v2[0],
            v2[1],
            v3[0],
            v3[1],
            worst_diff * 100.0
        ),
    )
}

fn objective_identities() -> Verdict {
    let with = |a: f64, w: f64| ActivationRegion {
        target_id: TargetId(1),
        region: Polygon2D::empty(),
        width: w,
        amplitude: a,
        bbox: AccuracyBox::default(),
        aim_center: AngularPoint::new(a, 0.0),
        selectable: true,
    };
    let speed_ok =
        score_speed(&with(2.5, 2.5)) == Some(-1.0) && score_speed(&with(0.0, 2.5)) == Some(0.0);

    let arm = ArmModel::default();
    let shoulder = Vec3::new(0.0, 1.4, 0.0);
    let elbow = shoulder - Vec3::y() * arm.upper_arm.length;
    let hanging = ArmPosture {
        shoulder,
        elbow,
        hand: elbow - Vec3::y() * arm.forearm.length,
        clamped: false,
    };
    let hanging_torque = shoulder_torque(&hanging, &arm);
    let horizontal = horizontal_torque(&arm);
    let oracle = horizontal_torque_oracle();
    let torque_ok = hanging_torque.abs() < 1e-9
        && (horizontal - oracle).abs() <= 0.01 * oracle
        && (horizontal - 10.61).abs() <= 0.01 * 10.61;

    let config = AdapterConfig::application();
    let scene = Scene::new(vec![Target {
        id: TargetId(3),
        shape: Shape::Sphere,
        position: [0.0, 1.6, 3.0],
        rotation_quaternion: [0.0, 0.0, 0.0, 1.0],
        scale: [0.2; 3],
        selectable: true,
    }])
    .unwrap();
    let ctx = extract_context(
        &scene,
        &ready_pointer(&Vec3::new(0.0, 1.6, 3.0)),
        &config.arm,
        20.0,
    )
    .unwrap();
    let bounds = config.normalization_bounds();
    let empty = score_region(
        &ActivationRegion::unselectable(TargetId(3)),
        Technique::StickyRay,
        &ctx,
        &config,
        &bounds,
    );
    let empty_ok = empty.normalized == ObjectiveVector::default();

    verdict(
        speed_ok && torque_ok && empty_ok,
        format!(
            "speed {speed_ok}; hanging {hanging_torque:.1e} N·m, horizontal {horizontal:.4} N·m vs {oracle:.4}; empty region zero {empty_ok}"
        ),
    )
}

fn synthetic(winner: Technique, lead: f64) -> Vec<TechniqueScore> {
    [Technique::StickyRay, Technique::RayCursor]
        .into_iter()
        .map(|t| {
            let v = if t == winner { 0.5 + lead } else { 0.5 };
            TechniqueScore {
                technique: t,
                overall: v,
                smoothed: ObjectiveVector {
                    speed: v,
                    accuracy: v,
                    comfort: v,
                    familiarity: v,
                },
                aggregate: None,
            }
        })
        .collect()
}

fn spread(k: usize) -> Vec<Technique> {
    (0..20)
        .map(|i| {
            if i * k / 20 != (i + 1) * k / 20 {
                Technique::RayCursor
            } else {
                Technique::StickyRay
            }
        })
        .collect()
}

fn hysteresis() -> Verdict {
    let config = AdapterConfig::study();
    let params_ok = config.window == 20 && config.required == 15 && config.margin_threshold == 0.0;
    let run = |p: &[Technique]| {
        let mut state = AdapterState::new(&config);
        p.iter()
            .map(|&t| decide(&mut state, synthetic(t, 0.1), &config).switched)
            .collect::<Vec<_>>()
    };
    let fifteen = run(&spread(15));
    let at_fifteen =
        fifteen.iter().position(|&s| s) == Some(19) && fifteen.iter().filter(|&&s| s).count() == 1;
    let fourteen = run(&spread(14).repeat(10));
    let none_at_fourteen = !fourteen.contains(&true);

    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut state = AdapterState::new(&config);
    let mut last: Option<usize> = None;
    let mut gap_ok = true;
    for i in 0..5000 {
        let winner = if rng.gen_bool(0.55) {
            Technique::RayCursor
        } else {
            Technique::StickyRay
        };
        if decide(
            &mut state,
            synthetic(winner, rng.gen_range(-0.05..0.2)),
            &config,
        )
        .switched
        {
            gap_ok &= last.is_none_or(|l| i - l >= config.required);
            last = Some(i);
        }
    }

    let env = generate_environment(&EnvironmentSpec::new(EnvKind::Dense, 0.5, 12)).unwrap();
    let start = env.spec.center();
    let goal = Vec3::from(env.scene.get(env.target).unwrap().position);
    let pointers: Vec<PointerState> = (0..60)
        .map(|i| ready_pointer(&(start + (goal - start) * (i as f64 / 59.0))))
        .collect();
    let sequence = |config: &AdapterConfig| {
        let mut state = AdapterState::new(config);
        pointers
            .iter()
            .map(|p| {
                let ctx = extract_context(&env.scene, p, &config.arm, config.cone_radius).unwrap();
                let regions = technique_regions(&env.scene, &ctx, config);
                let d = step(&ctx, &regions, config, &mut state, false);
                (d.optimal, d.current, d.switched)
            })
            .collect::<Vec<_>>()
    };
    let base = AdapterConfig::application();
    let reference = sequence(&base);
    let invariant = [0.05, 0.5, 3.0, 40.0].iter().all(|&k| {
        sequence(&AdapterConfig {
            weights: base.weights.scaled(k),
            ..base.clone()
        }) == reference
    });

    verdict(
        params_ok && at_fifteen && none_at_fourteen && gap_ok && invariant,
        format!(
            "15-of-20 switch {at_fifteen}; 14-of-20 none {none_at_fourteen}; re-switch gap {gap_ok}; weight scaling {invariant}"
        ),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, out);
            } else {
                out.push(p);
            }
        }
    }
    let mut paths = Vec::new();
    walk(dir, &mut paths);
    let mut out: Vec<(String, Vec<u8>)> = paths
        .into_iter()
        .map(|p| {
            (
                p.strip_prefix(dir).unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn determinism(batch: &BatchConfig, first: &BatchOutput) -> Verdict {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    first.write(a.path()).unwrap();
    run_batch(batch).unwrap().write(b.path()).unwrap();
    let fa = files(a.path());
    let identical = fa == files(b.path());
    let traces: Vec<&(String, Vec<u8>)> =
        fa.iter().filter(|(n, _)| n.starts_with("traces")).collect();
    let replayed = traces
        .iter()
        .filter(|(_, bytes)| {
            read_raw(Cursor::new(bytes))
                .ok()
                .and_then(|raw| replay(&raw, None).ok())
                .is_some_and(|o| matches!(o, ReplayOutcome::Identical { .. }))
        })
        .count();
    verdict(
        identical && replayed == traces.len() && !traces.is_empty(),
        format!(
            "{} files byte-identical {identical}; replay {replayed}/{}",
            fa.len(),
            traces.len()
        ),
    )
}

fn performance() -> Verdict {
    let env = generate_environment(&EnvironmentSpec::new(EnvKind::Dense, 0.5, 7)).unwrap();
    let config = AdapterConfig::application();
    let mut state = AdapterState::new(&config);
    let center = env.spec.center();
    let mut times: Vec<f64> = (0..300)
        .map(|k| {
            let a = k as f64 * 0.05;
            let p = ready_pointer(&(center + Vec3::new(a.sin() * 0.8, a.cos() * 0.5, 0.0)));
            let t0 = Instant::now();
            let ctx = extract_context(&env.scene, &p, &config.arm, config.cone_radius).unwrap();
            let regions = technique_regions(&env.scene, &ctx, &config);
            step(&ctx, &regions, &config, &mut state, false);
            t0.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    let p99 = times[(times.len() * 99).div_ceil(100) - 1];
    verdict(
        median <= 16.0 && p99 <= 33.0,
        format!("300 frames, median {median:.2} ms, p99 {p99:.2} ms"),
    )
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let started = Instant::now();
    let batch = BatchConfig {
        modes: vec![TrialMode::Adaptive],
        ..BatchConfig::default()
    };
    let output = run_batch(&batch).expect("study batch runs");

    let results = [
        ("switching convergence", convergence(&output)),
        ("switch economy", switch_economy(&output)),
        ("accuracy oracle", accuracy_oracle()),
        ("geometry oracles", geometry_oracles()),
        ("objective identities", objective_identities()),
        ("hysteresis suite", hysteresis()),
        ("determinism and replay", determinism(&batch, &output)),
        ("performance", performance()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{status} {name}: {}", v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance finished in {:.1} s",
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
