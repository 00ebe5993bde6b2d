//! Decision tree over `(c, d)` giving the guaranteed index bound and the
//! predicted Zsigmondy set wherever it is pinned down.
//!
//! Branches are tested in order, so exactly one fires:
//!
//! 1. finite critical orbit (`c = 0`, `-1` with `d` even, `-2` with `d = 2`);
//! 2. integral `c`;
//! 3. `|c| > 2^(d/(d-1))`;
//! 4. `c > 0`, or `d` odd;
//! 5. `-1 < c < 0`;
//! 6. `2^(1/(d-1)) < |c| < 2^(d/(d-1))`;
//! 7. the recurrent window `c in (-2^(1/(d-1)), -1)` with `d` even, split
//!    into the reducible case `c = -k^m / l^m` (`m | d`, `m > 1`) and the rest.
//!
//! In branches 2 to 7a the set is exact: `{2}` when `n = 2` is a member and
//! empty otherwise, and `M = 2` (no index above 2 is a member). Membership of
//! `n = 2` is read off directly: `a_2 = a (a^(d-1) + b^(d-1))` with the second
//! factor coprime to `a`, so `2` is a member iff `a^(d-1) + b^(d-1) = +-1`.
//! For `b >= 2` this happens iff `d = 2` and `a = -(b +- 1)`.
//!
//! The general recurrent case only has the cardinality bound `B`.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::Integer;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::power_triple;
use crate::divisibility;
use crate::error::{Error, Result};
use crate::mahler;
use crate::orbit::{Orbit, Parameter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    FiniteOrbit,
    IntegralDh,
    BigC,
    PositiveOrOdd,
    SmallNegWindow,
    MidWindow,
    RecurrentReducible,
    RecurrentGeneral,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::FiniteOrbit => "FINITE_ORBIT",
            CaseTag::IntegralDh => "INTEGRAL_DH",
            CaseTag::BigC => "BIG_C",
            CaseTag::PositiveOrOdd => "POSITIVE_OR_ODD",
            CaseTag::SmallNegWindow => "SMALL_NEG_WINDOW",
            CaseTag::MidWindow => "MID_WINDOW",
            CaseTag::RecurrentReducible => "RECURRENT_REDUCIBLE",
            CaseTag::RecurrentGeneral => "RECURRENT_GENERAL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicted {
    Exact(Vec<u32>),
    /// `#Z <= bound`.
    Bounded(u32),
    /// The orbit is finite, so the set is not defined.
    Undefined,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub parameter: Parameter,
    pub case_tag: CaseTag,
    /// No index above `m_of_c` is a member; `None` when no theorem bounds it
    /// (or the orbit is finite).
    pub m_of_c: Option<u32>,
    pub predicted: Predicted,
    pub n2_member: bool,
    pub power_triple: Option<(Integer, Integer, u32)>,
}

impl Classification {
    pub fn to_json(&self) -> Value {
        let m = match (self.case_tag, self.m_of_c) {
            (_, Some(m)) => json!(m),
            (CaseTag::FiniteOrbit, None) => Value::Null,
            (_, None) => json!("unbounded-by-theorem"),
        };
        let (predicted, bound) = match &self.predicted {
            Predicted::Exact(s) => (json!(s), Value::Null),
            Predicted::Bounded(b) => (Value::Null, json!(b)),
            Predicted::Undefined => (Value::Null, Value::Null),
        };
        let power = self.power_triple.as_ref().map_or(Value::Null, |(k, l, m)| {
            json!({ "k": crate::json::int(k), "l": crate::json::int(l), "m": m })
        });
        json!({
            "a": crate::json::int(self.parameter.a()),
            "b": crate::json::int(self.parameter.b()),
            "d": self.parameter.d(),
            "case_tag": self.case_tag.as_str(),
            "M": m,
            "predicted": predicted,
            "bound": bound,
            "n2_member": self.n2_member,
            "power_triple": power,
        })
    }
}

impl Serialize for Classification {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// `a^(d-1) + b^(d-1) = +-1`, i.e. `a_2` has no primitive prime.
pub fn n2_member(param: &Parameter) -> bool {
    if *param.a() == 0 {
        return false;
    }
    let e = param.d() - 1;
    let s = Integer::from(param.a().pow(e)) + Integer::from(param.b().pow(e));
    s == 1 || s == -1
}

/// The `n = 2` criterion in its closed form for `b >= 2`: `d = 2` and `a = -(b +- 1)`.
pub fn n2_closed_form(param: &Parameter) -> bool {
    let neg_a = Integer::from(-param.a());
    param.d() == 2 && (neg_a == Integer::from(param.b() + 1u32) || neg_a == Integer::from(param.b() - 1u32))
}

pub fn classify(param: &Parameter) -> Classification {
    let n2 = n2_member(param);
    let exact = |tag: CaseTag, power: Option<(Integer, Integer, u32)>| Classification {
        parameter: param.clone(),
        case_tag: tag,
        m_of_c: Some(2),
        predicted: Predicted::Exact(if n2 { vec![2] } else { vec![] }),
        n2_member: n2,
        power_triple: power,
    };
    if param.has_finite_orbit() {
        return Classification {
            parameter: param.clone(),
            case_tag: CaseTag::FiniteOrbit,
            m_of_c: None,
            predicted: Predicted::Undefined,
            n2_member: false,
            power_triple: None,
        };
    }
    if param.is_integral() {
        return exact(CaseTag::IntegralDh, None);
    }
    if param.cmp_escape_radius() == Ordering::Greater {
        return exact(CaseTag::BigC, None);
    }
    if *param.a() > 0 || param.d() % 2 == 1 {
        return exact(CaseTag::PositiveOrOdd, None);
    }
    // now d even, c < 0, b >= 2
    let abs_a = Integer::from(param.a().abs_ref());
    if abs_a < *param.b() {
        return exact(CaseTag::SmallNegWindow, None);
    }
    let inner = param.cmp_inner_radius();
    debug_assert_ne!(inner, Ordering::Equal, "b >= 2 never lies on the boundary");
    debug_assert_ne!(param.cmp_escape_radius(), Ordering::Equal);
    if inner == Ordering::Greater {
        return exact(CaseTag::MidWindow, None);
    }
    if let Some(t) = power_triple(param) {
        return exact(CaseTag::RecurrentReducible, Some(t));
    }
    Classification {
        parameter: param.clone(),
        case_tag: CaseTag::RecurrentGeneral,
        m_of_c: None,
        predicted: Predicted::Bounded(
            mahler::size_bound(param.d()).expect("the recurrent window needs d even"),
        ),
        n2_member: n2,
        power_triple: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Consistency {
    /// The exact prediction matches on `[2, n_max]`.
    Consistent,
    /// Only a cardinality bound was available and it holds.
    BoundOnly,
    Mismatch,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub classification: Classification,
    pub n_max: u32,
    pub computed: Vec<u32>,
    pub consistency: Consistency,
}

impl VerifyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "classification": self.classification.to_json(),
            "n_max": self.n_max,
            "computed": self.computed,
            "consistency": self.consistency,
        })
    }
}

/// Compare a classification with the computed set on `[2, n_max]`.
///
/// Returns [`Error::Mismatch`] with the evidence when they disagree.
pub fn check_consistency(class: &Classification, computed: &[u32], n_max: u32) -> Result<Consistency> {
    let (ok, kind) = match &class.predicted {
        Predicted::Exact(s) => {
            let want: Vec<u32> = s.iter().copied().filter(|&n| n <= n_max).collect();
            (want == computed, Consistency::Consistent)
        }
        Predicted::Bounded(b) => (computed.len() as u32 <= *b, Consistency::BoundOnly),
        Predicted::Undefined => {
            return Err(Error::FiniteOrbit(class.parameter.to_string()));
        }
    };
    if ok {
        Ok(kind)
    } else {
        Err(Error::Mismatch {
            message: format!(
                "{} (d = {}): computed {:?} against prediction",
                class.parameter,
                class.parameter.d(),
                computed
            ),
            evidence: Box::new(json!({
                "classification": class.to_json(),
                "computed": computed,
                "n_max": n_max,
            })),
        })
    }
}

pub fn verify_against_computation(param: &Parameter, n_max: u32) -> Result<VerifyReport> {
    let classification = classify(param);
    let computed = divisibility::zsigmondy_set(&Orbit::new(param.clone()), n_max)?;
    let consistency = check_consistency(&classification, &computed, n_max)?;
    Ok(VerifyReport {
        classification,
        n_max,
        computed,
        consistency,
    })
}
