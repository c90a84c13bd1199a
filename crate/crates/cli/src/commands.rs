use rayon::prelude::*;
use tfim_wasserstein::ed::{ed_mx_moments, ed_xx_correlator, ground_state_with};
use tfim_wasserstein::scaling::{
    distance_size_scaling, leading_exponent, linear_grid, log_grid, qfi_size_scaling,
    subleading_exponent, ScalingRun, SubleadingOptions, SIZE_LADDER,
};
use tfim_wasserstein::store::{CachedSource, TableStore};
use tfim_wasserstein::wasserstein::{distance_squared, qfi, G_CRITICAL};
use tfim_wasserstein::{Boundary, CorrelatorTable, DirectSource, Error, Result, TableSource};

use crate::output::{Cell, Report};
use crate::{BoundaryArg, Cli, Command, Figure, FitArgs, FitMode};

enum Source {
    Direct(DirectSource),
    Cached(CachedSource),
}

impl TableSource for Source {
    fn table(&self, g: f64, n_max: usize) -> Result<CorrelatorTable> {
        match self {
            Source::Direct(s) => s.table(g, n_max),
            Source::Cached(s) => s.table(g, n_max),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    let source = if g.no_cache {
        Source::Direct(DirectSource::new(g.quad_tol))
    } else {
        Source::Cached(CachedSource::new(TableStore::new(&g.cache_dir), g.quad_tol))
    };
    match &cli.command {
        Command::Correlator { g, n_max } => correlator(&source, *g, *n_max as usize),
        Command::Observables { g, l } => observables(&source, *g, *l),
        Command::Distance { g_rho, g_sigma, l } => distance(&source, *g_rho, *g_sigma, *l),
        Command::Qfi { g, l } => {
            let obs = source.moments(*g, *l)?;
            let mut r = Report::new(&["g", "l", "qfi"]);
            r.push(vec![obs.g.into(), obs.l.into(), qfi(&obs)?.into()]);
            Ok(r)
        }
        Command::Oracle { g, l, boundary } => oracle(*g, *l, *boundary),
        Command::Fit(args) => fit(&source, args),
        Command::Reproduce { figure } => reproduce(&source, figure),
    }
}

fn correlator(source: &Source, g: f64, n_max: usize) -> Result<Report> {
    let table = source.table(g, n_max)?;
    let mut r = Report::new(&["g", "n", "c"]);
    for n in 1..=n_max {
        r.push(vec![g.into(), n.into(), table.get(n).into()]);
    }
    r.note(
        "table",
        vec![
            ("method", table.method.tag().into()),
            ("quad_tol", table.tol.into()),
        ],
    );
    Ok(r)
}

fn observables(source: &Source, g: f64, l: usize) -> Result<Report> {
    let obs = source.moments(g, l)?;
    let mut r = Report::new(&["g", "l", "mx_mean", "mx2_mean", "variance"]);
    r.push(vec![
        obs.g.into(),
        obs.l.into(),
        obs.mx_mean.into(),
        obs.mx2_mean.into(),
        obs.variance().into(),
    ]);
    Ok(r)
}

const DISTANCE_COLUMNS: [&str; 8] = [
    "g_rho",
    "g_sigma",
    "l",
    "term_rho",
    "term_sigma",
    "cross",
    "d_squared",
    "d_squared_over_l2",
];

fn distance(source: &Source, g_rho: f64, g_sigma: f64, l: usize) -> Result<Report> {
    let (a, b) = rayon::join(|| source.moments(g_rho, l), || source.moments(g_sigma, l));
    let d = distance_squared(&a?, &b?)?;
    let mut r = Report::new(&DISTANCE_COLUMNS);
    r.push(vec![
        d.g_rho.into(),
        d.g_sigma.into(),
        d.l.into(),
        d.term_rho.into(),
        d.term_sigma.into(),
        d.cross.into(),
        d.d_squared.into(),
        d.per_site_squared().into(),
    ]);
    Ok(r)
}

fn oracle(g: f64, l: usize, boundary: BoundaryArg) -> Result<Report> {
    let boundary = match boundary {
        BoundaryArg::Periodic => Boundary::Periodic,
        BoundaryArg::Open => Boundary::Open,
    };
    let sol = ground_state_with(l, g, boundary)?;
    let n_max = match boundary {
        Boundary::Periodic => l / 2,
        Boundary::Open => l - 1,
    };
    let mut r = Report::new(&["g", "l", "n", "c_ed"]);
    for n in 1..=n_max {
        r.push(vec![
            g.into(),
            l.into(),
            n.into(),
            ed_xx_correlator(&sol, n)?.into(),
        ]);
    }
    let (mx, mx2) = ed_mx_moments(&sol);
    let tag = match boundary {
        Boundary::Periodic => "periodic",
        Boundary::Open => "open",
    };
    r.note(
        "ground",
        vec![
            ("boundary", tag.into()),
            ("energy", sol.energy.into()),
            ("mx_mean", mx.into()),
            ("mx2_mean", mx2.into()),
            ("symmetrized", sol.symmetrized.into()),
        ],
    );
    Ok(r)
}

fn fit_fields(run: &ScalingRun) -> Vec<(&'static str, Cell)> {
    let f = &run.fit;
    vec![
        ("exponent", f.exponent.into()),
        ("amplitude", f.amplitude.into()),
        ("stderr", f.stderr.into()),
        ("r_squared", f.r_squared.into()),
        ("window_lo", f.window.0.into()),
        ("window_hi", f.window.1.into()),
        ("n_points", f.n_points.into()),
        ("offset", run.offset.into()),
    ]
}

fn with_context(key: &'static str, value: Cell, run: &ScalingRun) -> Vec<(&'static str, Cell)> {
    let mut fields = vec![(key, value)];
    fields.extend(fit_fields(run));
    fields
}

fn required<T: Copy>(v: Option<T>, flag: &str, mode: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required for --mode {mode}")))
}

fn fit(source: &Source, args: &FitArgs) -> Result<Report> {
    let sizes = args.sizes.clone().unwrap_or_else(|| SIZE_LADDER.to_vec());
    let grid = |lo: f64, hi: f64| -> Result<Vec<f64>> {
        let (lo, hi) = (args.gt_min.unwrap_or(lo), args.gt_max.unwrap_or(hi));
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "--gt-min {lo} must be below --gt-max {hi}"
            )));
        }
        Ok(log_grid(lo, hi, args.points as usize))
    };
    let run = match args.mode {
        FitMode::Qfi => qfi_size_scaling(source, &sizes)?,
        FitMode::D2 => distance_size_scaling(
            source,
            required(args.g_rho, "g-rho", "d2")?,
            required(args.g_sigma, "g-sigma", "d2")?,
            &sizes,
        )?,
        FitMode::Subleading => {
            let g_sigma: Vec<f64> = grid(0.02, 0.2)?.iter().map(|gt| G_CRITICAL + gt).collect();
            subleading_exponent(
                source,
                &g_sigma,
                args.l.unwrap_or(700),
                &SubleadingOptions::default(),
            )?
        }
        FitMode::Leading => {
            let g_rho: Vec<f64> = grid(3e-3, 3e-2)?.iter().map(|gt| G_CRITICAL - gt).collect();
            leading_exponent(
                source,
                &g_rho,
                args.g_sigma.unwrap_or(10.0),
                args.l.unwrap_or(500),
            )?
        }
    };
    for w in &run.warnings {
        log::warn!("{w}");
    }
    let mut r = Report::new(&["g_rho", "g_sigma", "l", "x", "y"]);
    for p in &run.points {
        r.push(vec![
            p.g_rho.into(),
            p.g_sigma.into(),
            p.l.into(),
            p.x.into(),
            p.y.into(),
        ]);
    }
    r.note("fit", fit_fields(&run));
    Ok(r)
}

fn reproduce(source: &Source, figure: &Figure) -> Result<Report> {
    match figure {
        Figure::Fig1 {
            l,
            g_rho,
            g_sigma_min,
            g_sigma_max,
            points,
        } => fig1(
            source,
            *l,
            g_rho,
            *g_sigma_min,
            *g_sigma_max,
            *points as usize,
        ),
        Figure::Fig2a {
            sizes,
            g_min,
            g_max,
            points,
        } => fig2a(source, sizes, *g_min, *g_max, *points as usize),
        Figure::Fig2b { sizes, gt } => fig2b(source, sizes, gt),
        Figure::Fig3a {
            l,
            gt_min,
            gt_max,
            points,
        } => fig3a(source, l, *gt_min, *gt_max, *points as usize),
        Figure::Fig3b {
            l,
            g_sigma,
            gt_min,
            gt_max,
            points,
        } => fig3b(source, *l, *g_sigma, *gt_min, *gt_max, *points as usize),
    }
}

fn ordered_window(lo: f64, hi: f64, what: &str) -> Result<()> {
    if lo < hi {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what}: lower end {lo} must be below upper end {hi}"
        )))
    }
}

fn fig1(
    source: &Source,
    l: usize,
    g_rho: &[f64],
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Report> {
    ordered_window(lo, hi, "g_sigma window")?;
    let g_sigma = linear_grid(lo, hi, points);
    let rho = g_rho
        .par_iter()
        .map(|&g| source.moments(g, l))
        .collect::<Result<Vec<_>>>()?;
    let sigma = g_sigma
        .par_iter()
        .map(|&g| source.moments(g, l))
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(&["g_rho", "g_sigma", "l", "d_squared", "d_squared_over_l2"]);
    for a in &rho {
        for b in &sigma {
            let d = distance_squared(a, b)?;
            r.push(vec![
                a.g.into(),
                b.g.into(),
                l.into(),
                d.d_squared.into(),
                d.per_site_squared().into(),
            ]);
        }
    }
    Ok(r)
}

fn fig2a(source: &Source, sizes: &[usize], lo: f64, hi: f64, points: usize) -> Result<Report> {
    ordered_window(lo, hi, "g window")?;
    let mut grid = linear_grid(lo, hi, points);
    grid.push(G_CRITICAL);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let per_g = grid
        .par_iter()
        .map(|&g| source.moments_for_sizes(g, sizes))
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(&["g", "l", "qfi", "qfi_scaled"]);
    for obs in per_g.iter().flatten() {
        let f = qfi(obs)?;
        r.push(vec![
            obs.g.into(),
            obs.l.into(),
            f.into(),
            (f / (obs.l as f64).powf(1.75)).into(),
        ]);
    }
    let run = qfi_size_scaling(source, sizes)?;
    r.note("fit", with_context("g", G_CRITICAL.into(), &run));
    Ok(r)
}

fn fig2b(source: &Source, sizes: &[usize], gt: &[f64]) -> Result<Report> {
    let runs = gt
        .par_iter()
        .map(|&t| distance_size_scaling(source, G_CRITICAL - t, G_CRITICAL + t, sizes))
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(&["gt", "g_rho", "g_sigma", "l", "d_squared"]);
    for (&t, run) in gt.iter().zip(&runs) {
        for p in &run.points {
            r.push(vec![
                t.into(),
                p.g_rho.into(),
                p.g_sigma.into(),
                p.l.into(),
                p.y.into(),
            ]);
        }
    }
    for (&t, run) in gt.iter().zip(&runs) {
        for w in &run.warnings {
            log::warn!("{w}");
        }
        r.note("fit", with_context("gt", t.into(), run));
    }
    Ok(r)
}

fn fig3a(source: &Source, sizes: &[usize], lo: f64, hi: f64, points: usize) -> Result<Report> {
    ordered_window(lo, hi, "gt window")?;
    let g_sigma: Vec<f64> = log_grid(lo, hi, points)
        .iter()
        .map(|t| G_CRITICAL + t)
        .collect();
    let mut r = Report::new(&["l", "g_sigma", "gt", "y"]);
    let mut runs = Vec::with_capacity(sizes.len());
    for &l in sizes {
        let run = subleading_exponent(source, &g_sigma, l, &SubleadingOptions::default())?;
        for w in &run.warnings {
            log::warn!("{w}");
        }
        for p in &run.points {
            r.push(vec![l.into(), p.g_sigma.into(), p.x.into(), p.y.into()]);
        }
        runs.push((l, run));
    }
    for (l, run) in &runs {
        r.note("fit", with_context("l", (*l).into(), run));
    }
    Ok(r)
}

fn fig3b(
    source: &Source,
    l: usize,
    g_sigma: f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Report> {
    ordered_window(lo, hi, "gt window")?;
    let g_rho: Vec<f64> = log_grid(lo, hi, points)
        .iter()
        .map(|t| G_CRITICAL - t)
        .collect();
    let run = leading_exponent(source, &g_rho, g_sigma, l)?;
    let mut r = Report::new(&["g_rho", "g_sigma", "l", "gt", "d_squared_over_l2"]);
    for p in &run.points {
        r.push(vec![
            p.g_rho.into(),
            p.g_sigma.into(),
            l.into(),
            p.x.into(),
            p.y.into(),
        ]);
    }
    r.note("fit", fit_fields(&run));
    Ok(r)
}
