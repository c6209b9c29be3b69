use wavedg_core::dg2d::{assemble_staggered_2d, WaveSpeedField};
use wavedg_core::mesh::build_mesh_2d;
use wavedg_core::operator::{BoundaryCondition, DgState, FluxParams, Forcing};
use wavedg_core::timeint::{lts_step, LtsConfig};

fn square_band(count: usize, m: usize) -> Vec<usize> {
    let inside = |j: usize| j >= m && j + m < count;
    let mut out = Vec::new();
    for iy in 0..count {
        for ix in 0..count {
            if !(inside(ix) && inside(iy)) {
                out.push(iy * count + ix);
            }
        }
    }
    out
}

fn growth(q: usize, n: usize, m: usize, steps: usize, wide_dual: bool) {
    let mesh = build_mesh_2d(n).unwrap();
    let op = assemble_staggered_2d(
        &mesh,
        q,
        q,
        FluxParams::central(),
        WaveSpeedField::one_plus_r2(),
        BoundaryCondition::dirichlet(),
        Forcing::None,
    )
    .unwrap();
    let p = q + 1;
    let lts = if wide_dual {
        let bu = square_band(n, m);
        let bv = square_band(n + 1, m + 1);
        LtsConfig::from_elements(&op, m, p, p, bu, bv, false).unwrap()
    } else {
        LtsConfig::new(&op, m, p, p, false).unwrap()
    };
    let dt = 0.1 * op.h / 3.0;
    let mut rng = 0x9e3779b97f4a7c15u64;
    let mut state = DgState {
        coeffs: (0..op.layout.total)
            .map(|_| {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect(),
        time: 0.0,
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n0 = norm(&state.coeffs);
    for c in state.coeffs.iter_mut() {
        *c /= n0;
    }
    let mut tail = Vec::new();
    for k in 0..steps {
        state = lts_step(&op, &state, &lts, dt);
        let nn = norm(&state.coeffs);
        if k >= steps - 40 {
            tail.push(nn);
        }
        for c in state.coeffs.iter_mut() {
            *c /= nn;
        }
        state.time = 0.0;
    }
    let g = tail.iter().product::<f64>().powf(1.0 / tail.len() as f64);
    println!(
        "q={q} n={n} m={m} wide_dual={wide_dual}: per-step growth {:.10} (|g|-1 = {:+.3e})",
        g,
        g - 1.0
    );
}

fn rho(q: usize, n: usize, constant_c: bool, iters: usize) {
    let mesh = build_mesh_2d(n).unwrap();
    let c = if constant_c { WaveSpeedField::constant(1.0) } else { WaveSpeedField::one_plus_r2() };
    let op = assemble_staggered_2d(
        &mesh,
        q,
        q,
        FluxParams::central(),
        c,
        BoundaryCondition::dirichlet(),
        Forcing::None,
    )
    .unwrap();
    let total = op.layout.total;
    let mut rng = 0x2545f4914f6cdd1du64;
    let mut x: Vec<f64> = (0..total)
        .map(|_| {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut y = vec![0.0; total];
    let mut tail = Vec::new();
    for k in 0..iters {
        op.apply_linear(&x, &mut y);
        let nn = norm(&y);
        if k >= iters - 30 {
            tail.push(nn);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / nn;
        }
    }
    let r = tail.iter().product::<f64>().powf(1.0 / tail.len() as f64);
    println!(
        "q={q} n={n} c={}: rho*h = {:.4}  rho*dt = {:.4}",
        if constant_c { "1" } else { "1+r2" },
        r * op.h,
        r * 0.1 * op.h
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(|s| s == "rho").unwrap_or(false) {
        let q: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6);
        let constant_c = args.get(3).map(|s| s == "c1").unwrap_or(false);
        for a in args.iter().skip(4) {
            rho(q, a.parse().unwrap(), constant_c, 400);
        }
        return;
    }
    let q: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(6);
    let m: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(3);
    let steps: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(200);
    let wide: bool = args.get(4).map(|s| s == "wide").unwrap_or(false);
    for a in args.iter().skip(5) {
        growth(q, a.parse().unwrap(), m, steps, wide);
    }
}
