//! Comparator statistics evaluated on the shared permutation stream: Min-P,
//! SSU, the sum-of-powered-score family SPU(c), and its adaptive combination.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{column_rank_pvalues, min_over_k, step6_pvalue_le, ColumnMatrix};

/// SPU power: a finite `c ∈ 1..=8` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpuPower {
    Finite(u8),
    Infinity,
}

impl SpuPower {
    pub fn finite(c: u8) -> Result<Self> {
        if (1..=8).contains(&c) {
            Ok(SpuPower::Finite(c))
        } else {
            Err(Error::Config(format!("SPU power {c} outside 1..=8")))
        }
    }

    /// `{1, …, 8, ∞}`.
    pub fn standard_set() -> Vec<SpuPower> {
        (1..=8).map(SpuPower::Finite).chain([SpuPower::Infinity]).collect()
    }
}

impl fmt::Display for SpuPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpuPower::Finite(c) => write!(f, "{c}"),
            SpuPower::Infinity => f.write_str("Inf"),
        }
    }
}

/// Test method selector; tokens are `waf`, `af`, `minp`, `ssu`, `spu1`…`spu8`,
/// `spuInf` and `aspu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodTag {
    Waf,
    Af,
    MinP,
    Ssu,
    Spu(SpuPower),
    Aspu,
}

impl MethodTag {
    /// The five methods compared in the power studies.
    pub fn study_set() -> Vec<MethodTag> {
        vec![MethodTag::Waf, MethodTag::Ssu, MethodTag::Aspu, MethodTag::MinP, MethodTag::Af]
    }

    pub fn all() -> Vec<MethodTag> {
        let mut v = vec![MethodTag::Waf, MethodTag::Af, MethodTag::MinP, MethodTag::Ssu];
        v.extend(SpuPower::standard_set().into_iter().map(MethodTag::Spu));
        v.push(MethodTag::Aspu);
        v
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodTag::Waf => f.write_str("waf"),
            MethodTag::Af => f.write_str("af"),
            MethodTag::MinP => f.write_str("minp"),
            MethodTag::Ssu => f.write_str("ssu"),
            MethodTag::Spu(c) => write!(f, "spu{c}"),
            MethodTag::Aspu => f.write_str("aspu"),
        }
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "waf" => Ok(MethodTag::Waf),
            "af" => Ok(MethodTag::Af),
            "minp" => Ok(MethodTag::MinP),
            "ssu" => Ok(MethodTag::Ssu),
            "aspu" => Ok(MethodTag::Aspu),
            "spuinf" => Ok(MethodTag::Spu(SpuPower::Infinity)),
            other => match other.strip_prefix("spu").and_then(|c| c.parse::<u8>().ok()) {
                Some(c) => Ok(MethodTag::Spu(SpuPower::finite(c)?)),
                None => Err(Error::Config(format!("unknown method '{s}'"))),
            },
        }
    }
}

impl Serialize for MethodTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-variant weights inside SPU statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpuWeighting {
    /// Sample standard deviation of the adjusted genotype column.
    #[default]
    Sd,
    Flat,
}

/// `max_k |Ũ_k|`; larger is more significant.
pub fn minp_statistic(u_std: &[f64]) -> f64 {
    u_std.iter().fold(0.0, |m, u| m.max(u.abs()))
}

/// `Σ_k U_k²`; larger is more significant.
pub fn ssu_statistic(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum()
}

/// `Σ_k (sd_k Ũ_k)^c`, or `max_k |sd_k Ũ_k|` for `c = ∞`.
///
/// Returns the signed sum; odd powers are ranked by magnitude, see
/// [`spu_significance`].
pub fn spu_statistic(u_std: &[f64], sd: &[f64], c: SpuPower) -> Result<f64> {
    if u_std.len() != sd.len() {
        return Err(Error::Dimension(format!(
            "{} scores but {} SPU weights",
            u_std.len(),
            sd.len()
        )));
    }
    let terms = u_std.iter().zip(sd).map(|(u, s)| u * s);
    Ok(match c {
        SpuPower::Finite(p) => terms.map(|t| t.powi(p as i32)).sum(),
        SpuPower::Infinity => terms.fold(0.0, |m, t| m.max(t.abs())),
    })
}

/// Orients an SPU statistic so that larger is always more significant.
pub fn spu_significance(stat: f64, c: SpuPower) -> f64 {
    match c {
        SpuPower::Finite(p) if p % 2 == 1 => stat.abs(),
        _ => stat,
    }
}

/// Adaptive SPU: each SPU column is rank-converted to per-row p-values, the
/// row minimum is the aSPU statistic, and the observed row is referred to the
/// permuted rows. Columns must hold significance-oriented statistics
/// (larger is more significant), row 0 observed.
///
/// Returns `(T_aSPU^(0), p-value)`.
pub fn aspu_combine(spu_columns: &ColumnMatrix) -> Result<(f64, f64)> {
    if spu_columns.cols() == 0 {
        return Err(Error::Config("aSPU needs at least one SPU power".into()));
    }
    let pvalues = column_rank_pvalues(spu_columns)?;
    let t = min_over_k(&pvalues)?;
    Ok((t[0], step6_pvalue_le(&t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minp_examples() {
        assert_eq!(minp_statistic(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(minp_statistic(&[0.0, 0.0]), 0.0);
        assert_eq!(minp_statistic(&[-1.7]), 1.7);
    }

    #[test]
    fn ssu_examples() {
        assert_eq!(ssu_statistic(&[3.0, 4.0]), 25.0);
        assert_eq!(ssu_statistic(&[0.0, 0.0]), 0.0);
        assert_eq!(ssu_statistic(&[1.0; 50]), 50.0);
    }

    #[test]
    fn spu_examples() {
        let flat = [1.0, 1.0];
        assert_eq!(spu_statistic(&[3.0, 4.0], &flat, SpuPower::Finite(2)).unwrap(), 25.0);
        assert_eq!(spu_statistic(&[1.0, -1.0], &flat, SpuPower::Finite(1)).unwrap(), 0.0);
        let flat3 = [1.0; 3];
        assert_eq!(spu_statistic(&[1.0, -3.0, 2.0], &flat3, SpuPower::Infinity).unwrap(), 3.0);
        assert_eq!(spu_significance(-2.5, SpuPower::Finite(3)), 2.5);
        assert_eq!(spu_significance(2.5, SpuPower::Finite(4)), 2.5);
        assert!(spu_statistic(&[1.0], &[1.0, 1.0], SpuPower::Finite(2)).is_err());
    }

    #[test]
    fn method_tokens_round_trip() {
        for tag in MethodTag::all() {
            assert_eq!(tag.to_string().parse::<MethodTag>().unwrap(), tag);
        }
        assert_eq!("spuInf".parse::<MethodTag>().unwrap(), MethodTag::Spu(SpuPower::Infinity));
        assert!("spu9".parse::<MethodTag>().is_err());
        assert!("skat".parse::<MethodTag>().is_err());
        assert_eq!(serde_json::to_string(&MethodTag::Spu(SpuPower::Finite(3))).unwrap(), "\"spu3\"");
    }

    fn column_matrix(cols: &[&[f64]]) -> ColumnMatrix {
        let rows = cols[0].len();
        ColumnMatrix::from_columns(rows, cols.iter().flat_map(|c| c.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn aspu_with_one_power_is_that_powers_pvalue() {
        let col = [5.0, 1.0, 7.0, 2.0, 5.0];
        let (_, p) = aspu_combine(&column_matrix(&[&col])).unwrap();
        // Observed 5 is matched or beaten by rows 2 and 4.
        assert!((p - 3.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn aspu_with_identical_columns_matches_single_column() {
        let col = [3.0, 4.0, 1.0, 2.0];
        let (_, single) = aspu_combine(&column_matrix(&[&col])).unwrap();
        let (_, triple) = aspu_combine(&column_matrix(&[&col, &col, &col])).unwrap();
        assert_eq!(single, triple);
    }

    proptest! {
        #[test]
        fn even_powers_ignore_signs(
            pairs in prop::collection::vec((-5.0f64..5.0, any::<bool>()), 1..30),
            c in 1u8..=4,
        ) {
            let power = SpuPower::Finite(2 * c);
            let u: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let flipped: Vec<f64> = pairs.iter().map(|&(v, f)| if f { -v } else { v }).collect();
            let sd = vec![0.7; u.len()];
            prop_assert_eq!(
                spu_statistic(&u, &sd, power).unwrap(),
                spu_statistic(&flipped, &sd, power).unwrap()
            );
            prop_assert_eq!(
                spu_statistic(&u, &sd, SpuPower::Infinity).unwrap(),
                spu_statistic(&flipped, &sd, SpuPower::Infinity).unwrap()
            );
        }
    }
}
