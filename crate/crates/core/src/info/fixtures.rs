//! Named example structures, addressable as `name?key=value,...`.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

use super::structure::{InformationStructure, SignalSpec};

fn bits(name: &str) -> SignalSpec {
    SignalSpec { name: name.into(), outcomes: vec!["0".into(), "1".into()] }
}

fn bit_event() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

/// Uniform bit `E` observed exactly by two signals.
pub fn dup2() -> InformationStructure {
    InformationStructure::new(
        bit_event(),
        vec![bits("A1"), bits("A2")],
        vec![(0, vec![0, 0], 0.5), (1, vec![1, 1], 0.5)],
    )
    .expect("dup2 is valid")
}

/// Independent Bernoulli(`q`) signals with `E` their XOR.
pub fn xor2(q: f64) -> InformationStructure {
    let pb = |x: usize| if x == 1 { q } else { 1.0 - q };
    let atoms = (0..4)
        .map(|m| {
            let (a, b) = (m >> 1, m & 1);
            (a ^ b, vec![a, b], pb(a) * pb(b))
        })
        .filter(|t| t.2 > 0.0)
        .collect();
    InformationStructure::new(bit_event(), vec![bits("A1"), bits("A2")], atoms).expect("xor2 is valid")
}

/// `Pr[E=1] = r`; signal `i` equals `E` with probability `s[i]`,
/// independently given `E`.
pub fn ci(r: f64, s: &[f64]) -> InformationStructure {
    let n = s.len();
    let mut atoms = Vec::new();
    for e in 0..2usize {
        let pe = if e == 1 { r } else { 1.0 - r };
        for m in 0..1usize << n {
            let a: Vec<usize> = (0..n).map(|i| m >> (n - 1 - i) & 1).collect();
            let p = a.iter().zip(s).fold(pe, |acc, (&ai, &si)| acc * if ai == e { si } else { 1.0 - si });
            if p > 0.0 {
                atoms.push((e, a, p));
            }
        }
    }
    let sigs = (0..n).map(|i| bits(&format!("A{}", i + 1))).collect();
    InformationStructure::new(bit_event(), sigs, atoms).expect("ci is valid")
}

/// The three-signal CI structure used in examples: `r = 0.5`,
/// accuracies `(0.9, 0.8, 0.7)`.
pub fn ci3() -> InformationStructure {
    ci(0.5, &[0.9, 0.8, 0.7])
}

/// Independent uniform bits with `E` their OR.
pub fn or2() -> InformationStructure {
    let atoms = (0..4).map(|m| ((m >> 1) | (m & 1), vec![m >> 1, m & 1], 0.25)).collect();
    InformationStructure::new(bit_event(), vec![bits("A"), bits("B")], atoms).expect("or2 is valid")
}

/// `E = (Eb, Ec)`, outcome index `2*Eb + Ec`. Signal `i` is `(Eb, Ci)`,
/// outcome index `2*Eb + Ci`, with `C1, C2` uniform and `Ec = C1 xor C2`.
pub fn pair() -> InformationStructure {
    let ev = vec!["00".into(), "01".into(), "10".into(), "11".into()];
    let pair_sig = |name: &str| SignalSpec {
        name: name.into(),
        outcomes: vec!["00".into(), "01".into(), "10".into(), "11".into()],
    };
    let mut atoms = Vec::new();
    for eb in 0..2usize {
        for c1 in 0..2usize {
            for c2 in 0..2usize {
                atoms.push((2 * eb + (c1 ^ c2), vec![2 * eb + c1, 2 * eb + c2], 0.125));
            }
        }
    }
    InformationStructure::new(ev, vec![pair_sig("A1"), pair_sig("A2")], atoms).expect("pair is valid")
}

/// A fair die observed exactly by one signal.
pub fn dice() -> InformationStructure {
    let faces: Vec<String> = (1..=6).map(|i| i.to_string()).collect();
    let sig = SignalSpec { name: "D".into(), outcomes: faces.clone() };
    let atoms = (0..6).map(|i| (i, vec![i], 1.0 / 6.0)).collect();
    InformationStructure::new(faces, vec![sig], atoms).expect("dice is valid")
}

/// `Pr[E=1] = r`; signal `i` reveals `E` with probability `s[i]` and is
/// erased (`"?"`, index 2) otherwise, independently.
pub fn erasure(r: f64, s: &[f64]) -> InformationStructure {
    let n = s.len();
    let mut atoms = Vec::new();
    for e in 0..2usize {
        let pe = if e == 1 { r } else { 1.0 - r };
        for m in 0..1usize << n {
            let seen: Vec<bool> = (0..n).map(|i| m >> (n - 1 - i) & 1 == 1).collect();
            let p = seen.iter().zip(s).fold(pe, |acc, (&v, &si)| acc * if v { si } else { 1.0 - si });
            if p > 0.0 {
                let a = seen.iter().map(|&v| if v { e } else { 2 }).collect();
                atoms.push((e, a, p));
            }
        }
    }
    let sigs = (0..n)
        .map(|i| SignalSpec { name: format!("A{}", i + 1), outcomes: vec!["0".into(), "1".into(), "?".into()] })
        .collect();
    InformationStructure::new(bit_event(), sigs, atoms).expect("erasure is valid")
}

/// A random sparse structure: each `(e, a)` atom is kept with
/// probability `density`, with exponential weights.
pub fn random_structure<R: Rng + ?Sized>(
    rng: &mut R,
    n_event: usize,
    signal_sizes: &[usize],
    density: f64,
) -> InformationStructure {
    let combos: usize = signal_sizes.iter().product::<usize>() * n_event;
    loop {
        let mut atoms = Vec::new();
        for idx in 0..combos {
            if rng.gen::<f64>() >= density {
                continue;
            }
            let mut rest = idx;
            let e = rest % n_event;
            rest /= n_event;
            let a: Vec<usize> = signal_sizes
                .iter()
                .map(|&m| {
                    let x = rest % m;
                    rest /= m;
                    x
                })
                .collect();
            atoms.push((e, a, -(1.0 - rng.gen::<f64>()).ln() + 1e-3));
        }
        if atoms.is_empty() {
            continue;
        }
        let total: f64 = atoms.iter().map(|t| t.2).sum();
        atoms.iter_mut().for_each(|t| t.2 /= total);
        let drift: f64 = 1.0 - atoms.iter().map(|t| t.2).sum::<f64>();
        atoms[0].2 += drift;
        return InformationStructure::from_atoms(n_event, signal_sizes, atoms).expect("random structure is valid");
    }
}

/// Split `name?k=v,k=v` into the name and its parameters.
pub fn parse_spec(spec: &str) -> Result<(String, BTreeMap<String, String>)> {
    let (name, rest) = spec.split_once('?').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("parameter {kv:?} in {spec:?} is not key=value")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name.trim().to_ascii_lowercase(), params))
}

pub(crate) fn param_f64(params: &BTreeMap<String, String>, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) => v.parse().map_err(|_| Error::Parse(format!("parameter {key}={v:?} is not a number"))),
        None => default.ok_or_else(|| Error::Parse(format!("missing parameter {key}"))),
    }
}

fn param_list(params: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>> {
    params
        .get(key)
        .map(|v| {
            v.split(':')
                .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("parameter {key}: bad number {x:?}"))))
                .collect()
        })
        .transpose()
}

fn probability(key: &str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Parse(format!("{key}={x} is not a probability")))
    }
}

/// Names and parameter syntax of the available fixtures.
pub const FIXTURES: &[(&str, &str)] = &[
    ("dup2", "uniform bit E, A1 = A2 = E"),
    ("xor2?q=0.5", "A1, A2 iid Bernoulli(q), E = A1 xor A2"),
    ("ci?r=0.5,s=0.8,n=2", "Pr[E=1]=r, n signals equal E w.p. s; s=0.9:0.8:0.7 gives per-signal accuracies"),
    ("ci3", "ci with r=0.5, s=0.9:0.8:0.7"),
    ("or2", "A, B uniform bits, E = A or B"),
    ("pair", "E=(Eb,Ec); Ai=(Eb,Ci); Ec = C1 xor C2"),
    ("dice", "fair die observed exactly"),
    ("erasure?r=0.5,s=0.9:0.6", "signal i reveals E w.p. s_i, else '?'"),
    ("random?seed=1,n=2,k=2,m=2,density=0.7", "random sparse structure, k event outcomes, m outcomes per signal"),
];

/// Build a fixture from its spec string, e.g. `xor2?q=0.6`.
pub fn fixture(spec: &str) -> Result<InformationStructure> {
    let (name, p) = parse_spec(spec)?;
    match name.as_str() {
        "dup2" => Ok(dup2()),
        "xor2" => Ok(xor2(probability("q", param_f64(&p, "q", Some(0.5))?)?)),
        "ci" => {
            let r = probability("r", param_f64(&p, "r", Some(0.5))?)?;
            let s = match param_list(&p, "s")? {
                Some(v) if v.len() > 1 => v,
                Some(v) => vec![v[0]; param_f64(&p, "n", Some(2.0))? as usize],
                None => vec![0.8; param_f64(&p, "n", Some(2.0))? as usize],
            };
            for &x in &s {
                probability("s", x)?;
            }
            if s.is_empty() || s.len() > 16 {
                return Err(Error::Parse("ci needs between 1 and 16 signals".into()));
            }
            Ok(ci(r, &s))
        }
        "ci3" => Ok(ci3()),
        "or2" => Ok(or2()),
        "pair" => Ok(pair()),
        "dice" => Ok(dice()),
        "erasure" => {
            let r = probability("r", param_f64(&p, "r", Some(0.5))?)?;
            let s = param_list(&p, "s")?.unwrap_or_else(|| vec![0.9, 0.6]);
            for &x in &s {
                probability("s", x)?;
            }
            Ok(erasure(r, &s))
        }
        "random" => {
            use rand::SeedableRng;
            let seed = param_f64(&p, "seed", Some(0.0))? as u64;
            let n = param_f64(&p, "n", Some(2.0))? as usize;
            let k = param_f64(&p, "k", Some(2.0))? as usize;
            let m = param_f64(&p, "m", Some(2.0))? as usize;
            let density = probability("density", param_f64(&p, "density", Some(0.7))?)?;
            if n == 0 || k == 0 || m == 0 || n > 12 {
                return Err(Error::Parse("random needs 1 <= n <= 12 and k, m >= 1".into()));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Ok(random_structure(&mut rng, k, &vec![m; n], density.max(1e-3)))
        }
        other => Err(Error::Parse(format!("unknown fixture {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_fixture_specs() {
        assert_eq!(fixture("xor2?q=0.6").unwrap().prior_marginal()[1], 2.0 * 0.6 * 0.4);
        assert_eq!(fixture("ci?r=0.9,s=0.8").unwrap().n_signals(), 2);
        assert_eq!(fixture("ci?r=0.5,s=0.9:0.8:0.7").unwrap().n_signals(), 3);
        assert_eq!(fixture("ci?s=0.7,n=4").unwrap().n_signals(), 4);
        assert_eq!(fixture("DUP2").unwrap().support_len(), 2);
        assert!(fixture("nope").is_err());
        assert!(fixture("xor2?q=2").is_err());
        assert!(fixture("xor2?q").is_err());
    }

    #[test]
    fn fixtures_are_normalized() {
        for (spec, _) in FIXTURES {
            let s = fixture(spec).unwrap();
            let t: f64 = s.prior_marginal().iter().sum();
            assert!((t - 1.0).abs() < 1e-12, "{spec}");
        }
    }

    #[test]
    fn pair_layout() {
        let s = pair();
        assert_eq!(s.support_len(), 8);
        assert_eq!(s.prior_marginal(), vec![0.25; 4]);
    }
}
