//! Exact symbolic angles.
//!
//! Every angle produced by largest-angle bisection is a non-negative dyadic
//! combination `c_alpha * alpha + c_beta * beta + c_gamma * gamma` of the
//! initial triangle's angles. [`AngleForm`] stores those coefficients and
//! [`BaseAngles`] instantiates them exactly, in degrees.

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};

/// Coefficients of one angle in terms of the initial angles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AngleForm {
    pub c_alpha: DyadicRational,
    pub c_beta: DyadicRational,
    pub c_gamma: DyadicRational,
}

impl AngleForm {
    pub fn new(c_alpha: DyadicRational, c_beta: DyadicRational, c_gamma: DyadicRational) -> Self {
        Self {
            c_alpha,
            c_beta,
            c_gamma,
        }
    }

    pub fn alpha() -> Self {
        Self::new(DyadicRational::one(), DyadicRational::zero(), DyadicRational::zero())
    }

    pub fn beta() -> Self {
        Self::new(DyadicRational::zero(), DyadicRational::one(), DyadicRational::zero())
    }

    pub fn gamma() -> Self {
        Self::new(DyadicRational::zero(), DyadicRational::zero(), DyadicRational::one())
    }

    pub fn halve(&self) -> Self {
        Self::new(self.c_alpha.halve(), self.c_beta.halve(), self.c_gamma.halve())
    }

    pub fn coefficients(&self) -> [&DyadicRational; 3] {
        [&self.c_alpha, &self.c_beta, &self.c_gamma]
    }

    pub fn is_non_negative(&self) -> bool {
        self.coefficients().iter().all(|c| !c.is_negative())
    }
}

impl Add for &AngleForm {
    type Output = AngleForm;

    fn add(self, rhs: &AngleForm) -> AngleForm {
        AngleForm::new(
            &self.c_alpha + &rhs.c_alpha,
            &self.c_beta + &rhs.c_beta,
            &self.c_gamma + &rhs.c_gamma,
        )
    }
}

impl fmt::Display for AngleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.coefficients().into_iter().zip(["alpha", "beta", "gamma"]) {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if *c == DyadicRational::one() {
                f.write_str(name)?;
            } else {
                write!(f, "({c})*{name}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Sum of three forms, coefficient-wise. A valid triangle sums to `(1, 1, 1)`.
pub fn form_sum(forms: &[AngleForm; 3]) -> AngleForm {
    &(&forms[0] + &forms[1]) + &forms[2]
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_rational(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q` or a plain integer as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let trimmed = text.trim();
    BigRational::from_str(trimmed).map_err(|_| Error::InvalidAngle(trimmed.to_string()))
}

/// The three angles of the initial triangle, exact, in degrees, with
/// `alpha >= beta >= gamma > 0` and `alpha + beta + gamma = 180`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseAngles {
    alpha: BigRational,
    beta: BigRational,
    gamma: BigRational,
    /// Angles multiplied by `scale`, all integral.
    scaled: [BigInt; 3],
    scale: BigInt,
}

impl BaseAngles {
    /// Validates and sorts the angles into descending order.
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Result<Self> {
        for angle in [&a, &b, &c] {
            if !angle.is_positive() {
                return Err(Error::InvalidAngle(format_rational(angle)));
            }
        }
        let sum = &a + &b + &c;
        if sum != BigRational::from_integer(180.into()) {
            return Err(Error::AngleSum {
                sum: format_rational(&sum),
            });
        }
        let mut sorted = [a, b, c];
        sorted.sort_by(|x, y| y.cmp(x));
        let [alpha, beta, gamma] = sorted;

        let scale = alpha.denom().lcm(beta.denom()).lcm(gamma.denom());
        let scaled = [&alpha, &beta, &gamma].map(|x| x.numer() * (&scale / x.denom()));
        Ok(Self {
            alpha,
            beta,
            gamma,
            scaled,
            scale,
        })
    }

    pub fn from_integers(a: i64, b: i64, c: i64) -> Result<Self> {
        Self::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
            BigRational::from_integer(c.into()),
        )
    }

    /// Parses `"p/q,p/q,p/q"` (plain integers allowed).
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Arity(parts.len()));
        }
        let values = parts
            .iter()
            .map(|p| parse_rational(p))
            .collect::<Result<Vec<_>>>()?;
        let [a, b, c]: [BigRational; 3] = values.try_into().expect("three values");
        Self::new(a, b, c)
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn angles(&self) -> [&BigRational; 3] {
        [&self.alpha, &self.beta, &self.gamma]
    }

    pub fn degrees_f64(&self) -> [f64; 3] {
        self.angles().map(rational_to_f64)
    }

    pub fn radians(&self) -> [f64; 3] {
        self.degrees_f64().map(f64::to_radians)
    }

    /// Common denominator used by [`scaled_value`](Self::scaled_value).
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// `scale * evaluate(form)`, which is always dyadic. Comparing scaled
    /// values of the same base is equivalent to comparing the angles.
    pub fn scaled_value(&self, form: &AngleForm) -> DyadicRational {
        let terms = [
            form.c_alpha.mul_integer(&self.scaled[0]),
            form.c_beta.mul_integer(&self.scaled[1]),
            form.c_gamma.mul_integer(&self.scaled[2]),
        ];
        &(&terms[0] + &terms[1]) + &terms[2]
    }

    /// Converts a scaled value back to exact degrees.
    pub fn unscale(&self, scaled: &DyadicRational) -> BigRational {
        scaled.to_rational() / BigRational::from_integer(self.scale.clone())
    }

    pub fn unscale_f64(&self, scaled: &DyadicRational) -> f64 {
        rational_to_f64(&self.unscale(scaled))
    }

    pub fn evaluate(&self, form: &AngleForm) -> BigRational {
        let [a, b, c] = form.coefficients().map(DyadicRational::to_rational);
        a * &self.alpha + b * &self.beta + c * &self.gamma
    }

    /// The only base whose refinement stays in a single similarity class.
    pub fn is_right_isosceles(&self) -> bool {
        self.alpha == BigRational::from_integer(90.into())
            && self.beta == BigRational::from_integer(45.into())
    }
}

impl fmt::Display for BaseAngles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            format_rational(&self.alpha),
            format_rational(&self.beta),
            format_rational(&self.gamma)
        )
    }
}

impl FromStr for BaseAngles {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

pub fn evaluate_angle_form(form: &AngleForm, base: &BaseAngles) -> BigRational {
    base.evaluate(form)
}

/// `j_n = (2^n - (-1)^n) / 3`: 0, 1, 1, 3, 5, 11, 21, 43, ...
pub fn jacobsthal(n: u32) -> BigInt {
    let power = BigInt::one() << n;
    let sign = if n.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    (power - sign) / 3
}

/// Forms of the two non-`gamma` angles of the generation-`n` triangle that
/// keeps the original smallest angle: `(theta_n, phi_n)` with
/// `theta_n = j_{n+1}/2^n alpha + j_n/2^(n-1) beta` and
/// `phi_n = j_n/2^n alpha + j_{n-1}/2^(n-1) beta`.
///
/// Panics if `n == 0`.
pub fn upsilon_angles(n: u32) -> (AngleForm, AngleForm) {
    assert!(n >= 1, "upsilon_angles is defined for n >= 1");
    let theta = AngleForm::new(
        DyadicRational::new(jacobsthal(n + 1), n),
        DyadicRational::new(jacobsthal(n), n - 1),
        DyadicRational::zero(),
    );
    let phi = AngleForm::new(
        DyadicRational::new(jacobsthal(n), n),
        DyadicRational::new(jacobsthal(n - 1), n - 1),
        DyadicRational::zero(),
    );
    (theta, phi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaDistinctness {
    pub distinct: bool,
    /// `(p, q)` with `p < q` and `theta_p == theta_q`, smallest `q` first.
    pub first_collision: Option<(u32, u32)>,
}

/// Checks that `theta_1 .. theta_n_max` are pairwise distinct for the base's
/// own `alpha` and `beta`.
pub fn distinct_theta_check(base: &BaseAngles, n_max: u32) -> ThetaDistinctness {
    distinct_theta_check_labeled(base.alpha(), base.beta(), n_max)
}

/// Same as [`distinct_theta_check`] for an arbitrary labelled pair of
/// positive angles; the distinctness argument does not need `alpha >= beta`.
pub fn distinct_theta_check_labeled(
    alpha: &BigRational,
    beta: &BigRational,
    n_max: u32,
) -> ThetaDistinctness {
    assert!(n_max >= 2, "need at least two terms to compare");
    let mut seen: HashMap<BigRational, u32> = HashMap::new();
    for q in 1..=n_max {
        let (theta, _) = upsilon_angles(q);
        let value = theta.c_alpha.to_rational() * alpha + theta.c_beta.to_rational() * beta;
        if let Some(&p) = seen.get(&value) {
            return ThetaDistinctness {
                distinct: false,
                first_collision: Some((p, q)),
            };
        }
        seen.insert(value, q);
    }
    ThetaDistinctness {
        distinct: true,
        first_collision: None,
    }
}
