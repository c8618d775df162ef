//! Generates a synthetic top-m rankings file: many entities, partial fields
//! per event, and only the best `keep` positions recorded with the rest
//! pooled. Defaults produce a tour-season shape (631 entities, 46 events,
//! fields of 100-156, top 65 kept) for large-scale smoke runs.

use std::process::exit;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use gpl::data::{serialize_ranking, EntityTable, Ranking};
use gpl::predictive::simulate_event;
use gpl::Direction;

struct Opts {
    entities: usize,
    events: usize,
    field_min: usize,
    field_max: usize,
    keep: usize,
    theta_min: f64,
    theta_max: f64,
    seed: u64,
    out: Option<String>,
    theta_out: Option<String>,
}

impl Default for Opts {
    fn default() -> Self {
        Opts {
            entities: 631,
            events: 46,
            field_min: 100,
            field_max: 156,
            keep: 65,
            theta_min: 0.25,
            theta_max: 0.75,
            seed: 1,
            out: None,
            theta_out: None,
        }
    }
}

const USAGE: &str = "\
usage: gen_topm [options]
  --entities K      number of entities (default 631)
  --events N        number of events (default 46)
  --field-min A     smallest field size (default 100)
  --field-max B     largest field size (default 156)
  --keep M          ranked positions kept per event (default 65)
  --theta-min X     lower bound for true rates (default 0.25)
  --theta-max Y     upper bound for true rates (default 0.75)
  --seed S          RNG seed (default 1)
  --out PATH        rankings file (default stdout)
  --theta-out PATH  also write the true rates as 'label value' lines
";

fn parse_as<T: std::str::FromStr>(value: &str, flag: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value '{value}' for {flag}"))
}

fn parse_opts() -> Result<Opts, String> {
    let mut opts = Opts::default();
    let mut args = std::env::args().skip(1);
    while let Some(flag) = args.next() {
        if flag == "--help" || flag == "-h" {
            print!("{USAGE}");
            exit(0);
        }
        let value = args.next().ok_or_else(|| format!("{flag} needs a value"))?;
        match flag.as_str() {
            "--entities" => opts.entities = parse_as(&value, &flag)?,
            "--events" => opts.events = parse_as(&value, &flag)?,
            "--field-min" => opts.field_min = parse_as(&value, &flag)?,
            "--field-max" => opts.field_max = parse_as(&value, &flag)?,
            "--keep" => opts.keep = parse_as(&value, &flag)?,
            "--theta-min" => opts.theta_min = parse_as(&value, &flag)?,
            "--theta-max" => opts.theta_max = parse_as(&value, &flag)?,
            "--seed" => opts.seed = parse_as(&value, &flag)?,
            "--out" => opts.out = Some(value),
            "--theta-out" => opts.theta_out = Some(value),
            other => return Err(format!("unknown flag '{other}'")),
        }
    }
    if opts.entities == 0 || opts.events == 0 {
        return Err("--entities and --events must be positive".into());
    }
    if opts.field_min == 0 || opts.field_min > opts.field_max || opts.field_max > opts.entities {
        return Err("need 1 <= field-min <= field-max <= entities".into());
    }
    if opts.keep == 0 {
        return Err("--keep must be positive".into());
    }
    if !(opts.theta_min > 0.0 && opts.theta_min <= opts.theta_max && opts.theta_max <= 1.0) {
        return Err("need 0 < theta-min <= theta-max <= 1".into());
    }
    Ok(opts)
}

/// Keeps roughly the best `keep` positions, extending past ties so the cut
/// never splits a bucket, and pools everyone below the cut.
fn truncate(r: &Ranking, keep: usize) -> Ranking {
    let n = r.len();
    if keep >= n {
        return r.clone();
    }
    let mut m = keep.max(1);
    while m < n && r.buckets()[m] == r.buckets()[m - 1] {
        m += 1;
    }
    if m >= n {
        return r.clone();
    }
    let pool_bucket = r.buckets()[m - 1] + 1;
    let mut s = r.buckets().to_vec();
    s[m..].iter_mut().for_each(|b| *b = pool_bucket);
    Ranking::new(r.entities().to_vec(), s, m).expect("tie-respecting cut keeps the ranking valid")
}

fn main() {
    let opts = match parse_opts() {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            exit(1);
        }
    };

    let mut rng = StdRng::seed_from_u64(opts.seed);
    let k = opts.entities;
    let theta: Vec<f64> = (0..k)
        .map(|_| {
            rng.gen_range(opts.theta_min..opts.theta_max.max(opts.theta_min + f64::MIN_POSITIVE))
        })
        .collect();

    let mut entities = EntityTable::new();
    let width = (k - 1).to_string().len();
    for id in 0..k {
        entities.intern(&format!("p{id:0width$}"));
    }

    let mut lines = String::new();
    let mut ids: Vec<usize> = (0..k).collect();
    for _ in 0..opts.events {
        let size = rng.gen_range(opts.field_min..=opts.field_max);
        // partial shuffle: the first `size` slots become the field
        for i in 0..size {
            let j = rng.gen_range(i..k);
            ids.swap(i, j);
        }
        let field = &ids[..size];
        let event = simulate_event(&theta, field, Direction::Standard, &mut rng)
            .expect("field and rates are valid by construction");
        let ranking = truncate(&event.ranking, opts.keep);
        lines.push_str(&serialize_ranking(&ranking, &entities));
        lines.push('\n');
    }

    match &opts.out {
        Some(path) => std::fs::write(path, &lines).unwrap_or_else(|e| {
            eprintln!("error: writing {path}: {e}");
            exit(1);
        }),
        None => print!("{lines}"),
    }

    if let Some(path) = &opts.theta_out {
        let mut text = String::new();
        for (id, t) in theta.iter().enumerate() {
            text.push_str(&format!("{} {t}\n", entities.label(id)));
        }
        std::fs::write(path, text).unwrap_or_else(|e| {
            eprintln!("error: writing {path}: {e}");
            exit(1);
        });
    }
}
