//! Truncated Laurent-style power series with exact integer coefficients.
//!
//! A `QSeries` lives in the formal variable t = q^(1/D) for a per-value
//! substrate D >= 1, so fractional q-exponents like q^(1/2) and q^(1/4) are
//! ordinary integer t-exponents.  The series tracks the exact coefficients
//! of t^offset .. t^order:
//!
//!   * below `offset` every coefficient is known to be zero,
//!   * above `order` coefficients are *unknown* — never assumed zero.
//!
//! `offset` may be negative (prefactors like q^(-3/4) occur throughout the
//! character catalog), and coefficients are arbitrary-precision integers:
//! partition-like counts overflow 64 bits well below the orders used here.
//!
//! All operations allocate fresh immutable results; values can be shared
//! freely across threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::{Error, Result};

/// Exact truncated series in t = q^(1/D) over the integers.
#[derive(Debug, Clone)]
pub struct QSeries {
    /// Substrate: exponents are integer multiples of 1/denom in q-units.
    pub(crate) denom: u32,
    /// t-exponent of the lowest tracked coefficient (may be negative).
    pub(crate) offset: i64,
    /// Highest tracked t-exponent; everything above is unknown.
    pub(crate) order: i64,
    /// `coeffs[i]` is the coefficient of t^(offset + i).
    pub(crate) coeffs: Vec<BigInt>,
}

impl QSeries {
    // -----------------------------------------------------------------------
    // Construction
    // -----------------------------------------------------------------------

    /// Builds a series from raw parts, dropping known-zero leading
    /// coefficients (which only sharpens the truncation bookkeeping).
    ///
    /// Panics if the parts are inconsistent; this is the internal
    /// constructor behind every arithmetic operation.
    pub(crate) fn new(denom: u32, offset: i64, order: i64, coeffs: Vec<BigInt>) -> QSeries {
        assert!(denom >= 1, "substrate denominator must be positive");
        assert!(order >= offset, "order {order} below offset {offset}");
        assert_eq!(
            coeffs.len() as i64,
            order - offset + 1,
            "coefficient count must equal order - offset + 1"
        );
        let mut s = QSeries { denom, offset, order, coeffs };
        s.trim();
        s
    }

    /// Drops leading zeros: they are *known* zeros, so raising `offset`
    /// loses nothing and keeps later convolutions short.
    fn trim(&mut self) {
        let lead = self
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.coeffs.len() - 1);
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.offset += lead as i64;
        }
    }

    /// The zero series, tracked (and known zero) through t^order.
    pub fn zero(denom: u32, order: i64) -> QSeries {
        QSeries {
            denom,
            offset: order.min(0),
            order,
            coeffs: vec![BigInt::zero(); (order - order.min(0) + 1) as usize],
        }
    }

    /// The constant series 1, tracked through t^order.
    pub fn one(denom: u32, order: i64) -> QSeries {
        Self::monomial(1, 0, denom, order).expect("order >= 0 for the unit series")
    }

    /// The monomial c·t^e tracked through t^order, with offset min(e, 0) so
    /// the constant-term range is always represented.
    ///
    /// Errors when `order < e`: the monomial would not be representable.
    pub fn monomial(c: i64, e: i64, denom: u32, order: i64) -> Result<QSeries> {
        if order < e {
            return Err(Error::OrderTooSmall {
                order,
                what: format!("monomial t^{e} lies above the truncation"),
            });
        }
        let offset = e.min(0);
        let mut coeffs = vec![BigInt::zero(); (order - offset + 1) as usize];
        coeffs[(e - offset) as usize] = BigInt::from(c);
        Ok(QSeries { denom, offset, order, coeffs })
    }

    // -----------------------------------------------------------------------
    // Accessors
    // -----------------------------------------------------------------------

    /// Substrate denominator D (t = q^(1/D)).
    pub fn denom(&self) -> u32 {
        self.denom
    }

    /// Lowest tracked t-exponent.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Highest tracked t-exponent.
    pub fn order(&self) -> i64 {
        self.order
    }

    /// Exact coefficient of t^e.
    ///
    /// Returns zero below the offset (those coefficients are known zero) and
    /// an error above the order: an unknown coefficient is never reported as
    /// zero.
    pub fn coeff_at(&self, e: i64) -> Result<BigInt> {
        if e > self.order {
            return Err(Error::UnknownCoefficient { exp: e, order: self.order });
        }
        if e < self.offset {
            return Ok(BigInt::zero());
        }
        Ok(self.coeffs[(e - self.offset) as usize].clone())
    }

    /// Exact coefficient of q^n for integer n (i.e. of t^(n·D)).
    pub fn coeff_q(&self, n: i64) -> Result<BigInt> {
        self.coeff_at(n * self.denom as i64)
    }

    // -----------------------------------------------------------------------
    // Ring operations
    // -----------------------------------------------------------------------

    /// Coefficientwise sum.  The result is tracked where *both* inputs are
    /// known: order = min of the orders, offset = min of the offsets.
    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        if self.denom != other.denom {
            return Err(Error::SubstrateMismatch(self.denom, other.denom));
        }
        let offset = self.offset.min(other.offset);
        let order = self.order.min(other.order);
        let mut coeffs = vec![BigInt::zero(); (order - offset + 1) as usize];
        for e in offset..=order {
            let mut c = BigInt::zero();
            if e >= self.offset && e <= self.order {
                c += &self.coeffs[(e - self.offset) as usize];
            }
            if e >= other.offset && e <= other.order {
                c += &other.coeffs[(e - other.offset) as usize];
            }
            coeffs[(e - offset) as usize] = c;
        }
        Ok(QSeries::new(self.denom, offset, order, coeffs))
    }

    /// Additive inverse with unchanged tracking range.
    pub fn negate(&self) -> QSeries {
        QSeries {
            denom: self.denom,
            offset: self.offset,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Subtraction, `self - other`, with `add`'s tracking rule.
    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.negate())
    }

    /// Truncated convolution.
    ///
    /// offset = sum of offsets; order = min(a.order + b.offset,
    /// b.order + a.offset): the largest exponent whose coefficient is fully
    /// determined by the tracked parts of both inputs.  Nothing beyond it is
    /// reported.
    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        if self.denom != other.denom {
            return Err(Error::SubstrateMismatch(self.denom, other.denom));
        }
        let offset = self.offset + other.offset;
        let order = (self.order + other.offset).min(other.order + self.offset);
        let len = (order - offset + 1) as usize;
        let mut coeffs = vec![BigInt::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break; // rows beyond the result order contribute nothing
            }
            if a.is_zero() {
                continue;
            }
            // j is bounded so that the output index stays within the result.
            let j_max = len - 1 - i;
            for (j, b) in other.coeffs.iter().enumerate().take(j_max + 1) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        Ok(QSeries::new(self.denom, offset, order, coeffs))
    }

    /// Multiply by the monomial c·t^e (cheap: shifts the tracking window).
    pub fn mul_monomial(&self, c: i64, e: i64) -> QSeries {
        let c = BigInt::from(c);
        QSeries {
            denom: self.denom,
            offset: self.offset + e,
            order: self.order + e,
            coeffs: self.coeffs.iter().map(|x| x * &c).collect(),
        }
    }

    /// Multiplicative inverse through the common order.
    ///
    /// Requires the lowest tracked coefficient to be ±1 (every Pochhammer
    /// factor and every normalised character satisfies this).  The result
    /// has offset −self.offset and satisfies mul(self, inv) = 1 through the
    /// product's tracked order.
    pub fn invert(&self) -> Result<QSeries> {
        let lead = &self.coeffs[0];
        if !(lead.is_one() || (-lead).is_one()) {
            return Err(Error::NonUnitLeadingCoeff(self.offset, lead.to_string()));
        }
        let len = self.coeffs.len();
        let mut inv = vec![BigInt::zero(); len];
        // lead is ±1, so 1/lead = lead.
        inv[0] = lead.clone();
        for k in 1..len {
            // Coefficient k of (self/t^offset)·(inv) must vanish:
            //   sum_{i=0..k} a_i · inv_{k-i} = 0.
            let mut acc = BigInt::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() && !inv[k - i].is_zero() {
                    acc += &self.coeffs[i] * &inv[k - i];
                }
            }
            inv[k] = if lead.is_one() { -acc } else { acc };
        }
        Ok(QSeries::new(
            self.denom,
            -self.offset,
            -self.offset + len as i64 - 1,
            inv,
        ))
    }

    /// In-place multiplication by the factor (1 − sign·t^e) with e ≥ 0.
    ///
    /// The tracking window is unchanged: the factor's constant term is 1 and
    /// shifted terms that leave the window lie above the truncation anyway.
    pub(crate) fn mul_one_minus_monomial(&mut self, sign: i64, e: i64) {
        debug_assert!(e >= 0);
        let len = self.coeffs.len();
        let e = e as usize;
        if e >= len && e > 0 {
            return; // the shifted copy lands entirely above the order
        }
        for j in (e..len).rev() {
            let c = self.coeffs[j - e].clone();
            if sign >= 0 {
                self.coeffs[j] -= c;
            } else {
                self.coeffs[j] += c;
            }
        }
    }

    /// Extends the tracked range with zeros.
    ///
    /// Only valid when the caller *knows* the value is a polynomial whose
    /// support is already fully inside the window (Gaussian polynomials,
    /// finite Pochhammer products); for a genuinely truncated series this
    /// would fabricate coefficients.
    pub(crate) fn extend_known_zero(&self, order: i64) -> QSeries {
        assert!(order >= self.order);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((order - self.offset + 1) as usize, BigInt::zero());
        QSeries { denom: self.denom, offset: self.offset, order, coeffs }
    }

    // -----------------------------------------------------------------------
    // Substrate plumbing
    // -----------------------------------------------------------------------

    /// Restricts the tracking window to a smaller order, dropping the
    /// higher coefficients.  `new_order` must lie inside the current window.
    pub fn truncate(&self, new_order: i64) -> QSeries {
        assert!(new_order <= self.order && new_order >= self.offset);
        QSeries {
            denom: self.denom,
            offset: self.offset,
            order: new_order,
            coeffs: self.coeffs[..(new_order - self.offset + 1) as usize].to_vec(),
        }
    }

    /// Reinterprets the series on a substrate k times finer: q^(1/D) becomes
    /// q^(1/(kD)) with every t-exponent multiplied by k.  The value is
    /// unchanged; in-between coefficients are known zeros.
    pub fn refine_denom(&self, k: u32) -> QSeries {
        assert!(k >= 1);
        if k == 1 {
            return self.clone();
        }
        let k64 = k as i64;
        let offset = self.offset * k64;
        let order = self.order * k64;
        let mut coeffs = vec![BigInt::zero(); (order - offset + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        QSeries { denom: self.denom * k, offset, order, coeffs }
    }

    /// The substitution q -> q^k on an integer substrate: every t-exponent
    /// is multiplied by k while D stays fixed.
    ///
    /// Coefficients between multiples of k are known zeros, so the result is
    /// exact through k·order + (k−1).
    pub fn stretch(&self, k: u32) -> QSeries {
        assert!(k >= 1);
        if k == 1 {
            return self.clone();
        }
        let k64 = k as i64;
        let offset = self.offset * k64;
        let order = self.order * k64 + (k64 - 1);
        let mut coeffs = vec![BigInt::zero(); (order - offset + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        QSeries { denom: self.denom, offset, order, coeffs }
    }

    /// Accumulator helper for the fermionic evaluator: adds
    /// `contrib` (on a coarser grid) into `self` at t-exponent
    /// `shift + stride·j` for each tracked exponent j of `contrib`,
    /// where stride = self.denom / contrib.denom.
    ///
    /// Contributions above self.order are discarded (they lie beyond the
    /// truncation); the caller guarantees contrib covers everything below.
    pub(crate) fn add_assign_spread(&mut self, contrib: &QSeries, shift: i64) {
        debug_assert_eq!(self.denom % contrib.denom, 0);
        let stride = (self.denom / contrib.denom) as i64;
        for (j, c) in contrib.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = shift + stride * (contrib.offset + j as i64);
            if e > self.order {
                break;
            }
            debug_assert!(e >= self.offset, "accumulator window too small");
            self.coeffs[(e - self.offset) as usize] += c;
        }
    }

    // -----------------------------------------------------------------------
    // Output
    // -----------------------------------------------------------------------

    /// CSV dump with header `t_exponent,q_exponent,coefficient`; the
    /// q-exponent is the exact rational t_exponent/D, rendered as `a/b` or
    /// as a plain integer when D divides the t-exponent.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("t_exponent,q_exponent,coefficient\n");
        for e in self.offset..=self.order {
            let c = &self.coeffs[(e - self.offset) as usize];
            out.push_str(&format!("{e},{},{c}\n", render_q_exponent(e, self.denom)));
        }
        out
    }
}

/// Renders the exact rational e/D in lowest terms (`3`, `-1/2`, `7/4`, ...).
pub(crate) fn render_q_exponent(e: i64, denom: u32) -> String {
    let d = denom as i64;
    let g = e.gcd(&d);
    let (n, m) = (e / g, d / g);
    if m == 1 {
        format!("{n}")
    } else {
        format!("{n}/{m}")
    }
}

/// Mathematical equality of the tracked data: same substrate, same order,
/// and identical coefficients at every exponent through the order (known
/// zeros below either offset included).
impl PartialEq for QSeries {
    fn eq(&self, other: &QSeries) -> bool {
        if self.denom != other.denom || self.order != other.order {
            return false;
        }
        let lo = self.offset.min(other.offset);
        (lo..=self.order).all(|e| {
            let a = self.coeff_at(e).expect("within order");
            let b = other.coeff_at(e).expect("within order");
            a == b
        })
    }
}

impl Eq for QSeries {}

impl fmt::Display for QSeries {
    /// Renders like `1 - q^(1/2) + 2*q^3 + O(q^(7/2))` using q-exponents.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for e in self.offset..=self.order {
            let c = &self.coeffs[(e - self.offset) as usize];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if wrote {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let exp = render_q_exponent(e, self.denom);
            if e == 0 {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                if exp.contains('/') || exp.starts_with('-') {
                    write!(f, "q^({exp})")?;
                } else if exp == "1" {
                    write!(f, "q")?;
                } else {
                    write!(f, "q^{exp}")?;
                }
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        write!(f, " + O(q^({}))", render_q_exponent(self.order + 1, self.denom))
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
