//! Declarative fermionic multisum forms and a pruned exact evaluator.
//!
//! A fermionic form is a sum
//!
//!   q^c · Σ_y  q^(yᵀQy + Lᵀy + tail(y)) · [top(y); y_bot] / Π denom(y)
//!
//! over tuples y of nonnegative integers: first the auxiliary variables
//! (M, or m, or m₁ and m₂ — possibly parity-restricted), then a block of
//! chain variables which are either weakly decreasing (N_1 ≥ … ≥ N_L ≥ 0,
//! with difference denominators (q)_{N_j−N_{j+1}}) or free (n_j ≥ 0 with
//! denominators (q)_{n_j}).  Q and L have rational entries with
//! denominators dividing 4; the optional Gaussian-polynomial factor
//! vanishes outside 0 ≤ y_bot ≤ top(y), which bounds that variable.
//!
//! The evaluator enumerates assignments depth-first in variable order and
//! prunes with a provable lower bound on the exponent of any completion:
//! negative off-diagonal couplings 2Q_ij·y_iy_j are absorbed into the
//! diagonals via 2Q_ij y_iy_j ≥ Q_ij(y_i² + y_j²) (Q_ij < 0), leaving
//! independent one-variable quadratics a·y² + b·y whose minima over y ≥ 0
//! are exact.  The shifted diagonals must stay positive — that is the
//! properness check — and every branch gets a hard cap on its value from
//! the same bound, so no contributing assignment is ever skipped.  A
//! doubled-threshold re-run (`eval_form_certified`) cross-checks the
//! pruning empirically.
//!
//! Exponent bookkeeping is in quarter units (4× the q-exponent) using
//! machine integers; per-variable denominator factors are attached to the
//! running product as the corresponding variable is fixed, with inverted
//! Pochhammer factors cached per evaluation.  The running products live on
//! the coarsest grid that carries the denominators (usually q itself),
//! and leaves are spread onto the accumulator's finer substrate.

use std::collections::HashMap;
use std::rc::Rc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::qfunctions::{gaussian, poch_finite_signed, QMonomial};
use crate::series::QSeries;
use crate::{Error, Rat, Result};

// ---------------------------------------------------------------------------
// Spec types
// ---------------------------------------------------------------------------

/// Parity restriction on an auxiliary summation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Any,
    Even,
    Odd,
}

impl Parity {
    fn admits(self, v: i64) -> bool {
        match self {
            Parity::Any => true,
            Parity::Even => v % 2 == 0,
            Parity::Odd => v % 2 == 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Parity::Any => "any",
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// An auxiliary (non-chain) summation variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtraVar {
    pub name: String,
    pub parity: Parity,
}

/// How the chain block of variables is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainCoords {
    /// Weakly decreasing N_1 ≥ … ≥ N_L ≥ 0 (theorem forms).
    Descending,
    /// Independent n_j ≥ 0 (lemma forms, where N_j = n_j + … + n_L).
    Free,
}

/// The length index of one denominator factor (q^arg; q^step)_len.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenomLen {
    /// Value of the given auxiliary variable ((q)_M, (q^{1/2};q)_M, …).
    Extra(usize),
    /// Value plus one ((q^{1/2};q)_{M+1}).
    ExtraPlusOne(usize),
    /// Free chain variable's own value ((q)_{n_j}), 1-based.
    ChainVar(usize),
    /// Difference of consecutive chain variables ((q)_{N_j−N_{j+1}}), 1-based j.
    ChainDiff(usize),
    /// Last chain variable ((q)_{N_L}).
    ChainLast,
}

/// One denominator factor (q^arg; q^step)_len.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenomFactor {
    pub arg: Rat,
    pub step: Rat,
    pub len: DenomLen,
}

/// Gaussian polynomial factor [top(y); bottom]: `top` is an affine form
/// over the variables (integer-valued on every admissible assignment) and
/// `bottom` a variable index.  All variables appearing in `top` must come
/// before `bottom` in evaluation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianFactor {
    pub top_coeffs: Vec<Rat>,
    pub top_const: Rat,
    pub bottom: usize,
}

/// A complete declarative description of a fermionic multisum.
///
/// Variable order (for `quad`, `lin` and Gaussian coefficients): the
/// auxiliary variables in listed order, then the chain block.  The
/// exponent of an assignment y is
///   const_exp + yᵀ·quad·y + lin·y + Σ_{j ≥ tail_start} N_j,
/// with the tail taken as 0 when tail_start exceeds the chain length.
/// `stretch` = k evaluates under q → q^k (the §-style substituted
/// displays); 1 for everything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermionicFormSpec {
    pub chain_len: usize,
    pub coords: ChainCoords,
    pub extra_vars: Vec<ExtraVar>,
    pub quad: Vec<Vec<Rat>>,
    pub lin: Vec<Rat>,
    pub const_exp: Rat,
    pub tail_start: usize,
    pub denom_factors: Vec<DenomFactor>,
    pub gaussian_factor: Option<GaussianFactor>,
    pub stretch: u32,
}

impl FermionicFormSpec {
    pub fn num_vars(&self) -> usize {
        self.extra_vars.len() + self.chain_len
    }

    /// Display name of a variable by global index.
    pub fn var_name(&self, idx: usize) -> String {
        let e = self.extra_vars.len();
        if idx < e {
            self.extra_vars[idx].name.clone()
        } else {
            let j = idx - e + 1;
            match self.coords {
                ChainCoords::Descending => format!("N{j}"),
                ChainCoords::Free => format!("n{j}"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// Substituted single-sum identities (stretched theorem left sides).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialTag {
    Eq2_13,
    Eq2_14,
    Eq2_15,
    Eq2_16,
    Eq2_16Alt,
    Eq2_18,
    Eq2_19,
    Eq2_20,
}

impl SpecialTag {
    pub fn name(self) -> &'static str {
        match self {
            SpecialTag::Eq2_13 => "eq_2_13",
            SpecialTag::Eq2_14 => "eq_2_14",
            SpecialTag::Eq2_15 => "eq_2_15",
            SpecialTag::Eq2_16 => "eq_2_16",
            SpecialTag::Eq2_16Alt => "eq_2_16_alt",
            SpecialTag::Eq2_18 => "eq_2_18",
            SpecialTag::Eq2_19 => "eq_2_19",
            SpecialTag::Eq2_20 => "eq_2_20",
        }
    }
}

/// Every fermionic sum that can be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormFamily {
    /// Andrews–Gordon sum for modulus 2k+1, class i.
    Ag { k: i64, i: i64 },
    Thm2_1 { g: i64, s: i64 },
    Thm2_2 { h: i64 },
    Thm2_3 { g: i64, s: i64 },
    Thm2_4 { h: i64 },
    Thm2_5 { g: i64, s: i64 },
    Thm2_6 { g: i64 },
    Thm2_7 { g: i64, s: i64 },
    Thm2_8 { g: i64 },
    /// The four explicit rank-3 sums (written-out g=4 / h=2 cases).
    M37Explicit { k: i64 },
    /// The double sums with a Gaussian factor (k = 2 is conjectural).
    Asw { k: i64 },
    /// The alternative left side printed alongside the fourth double sum.
    Asw4Alt,
    Lemma3_1 { g: i64, s: i64, b: bool },
    Lemma3_2 { h: i64 },
    Lemma3_3 { g: i64, s: i64, b: bool },
    Lemma3_4 { h: i64 },
    Lemma3_5 { g: i64, s: i64, b: bool },
    Lemma3_6 { g: i64, b: bool },
    Lemma3_7 { g: i64, s: i64, b: bool },
    Lemma3_8 { g: i64, b: bool },
    Special(SpecialTag),
}

fn check_gs(g: i64, s: i64) -> Result<()> {
    if g < 1 || s < 1 || s > g + 1 {
        return Err(Error::Domain(format!("need g >= 1 and 1 <= s <= g+1, got g = {g}, s = {s}")));
    }
    Ok(())
}

fn check_h(h: i64) -> Result<()> {
    if h < 1 {
        return Err(Error::Domain(format!("need h >= 1, got h = {h}")));
    }
    Ok(())
}

fn check_g(g: i64) -> Result<()> {
    if g < 1 {
        return Err(Error::Domain(format!("need g >= 1, got g = {g}")));
    }
    Ok(())
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn zeros(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

fn zero_matrix(n: usize) -> Vec<Vec<Rat>> {
    vec![zeros(n); n]
}

/// Σ_j N_j² over a descending chain: the identity matrix block.
fn chain_identity(quad: &mut [Vec<Rat>], e: usize, l: usize) {
    for j in 0..l {
        quad[e + j][e + j] = Rat::from_integer(1);
    }
}

/// Σ_j N_j² in free coordinates (N_j = n_j + … + n_L): entries min(a,b).
fn chain_min_matrix(quad: &mut [Vec<Rat>], e: usize, l: usize) {
    for a in 0..l {
        for b in 0..l {
            quad[e + a][e + b] = Rat::from_integer((a.min(b) + 1) as i64);
        }
    }
}

/// Coupling c·v·Σ_j N_j for an auxiliary variable v (index vi).
fn couple_chain_sum(quad: &mut [Vec<Rat>], coords: ChainCoords, e: usize, l: usize, vi: usize, c: Rat) {
    for j in 0..l {
        let w = match coords {
            // Σ N_j = Σ N_j directly.
            ChainCoords::Descending => c / 2,
            // Σ_j N_j = Σ_a a·n_a.
            ChainCoords::Free => c * Rat::from_integer((j + 1) as i64) / 2,
        };
        quad[vi][e + j] += w;
        quad[e + j][vi] += w;
    }
}

/// Difference + last denominators of a descending chain.
fn chain_denoms_descending(l: usize) -> Vec<DenomFactor> {
    let mut v = Vec::new();
    for j in 1..l {
        v.push(DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::ChainDiff(j) });
    }
    if l > 0 {
        v.push(DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::ChainLast });
    }
    v
}

/// Per-variable denominators of a free chain.
fn chain_denoms_free(l: usize) -> Vec<DenomFactor> {
    (1..=l)
        .map(|j| DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::ChainVar(j) })
        .collect()
}

/// The five p=3-style single-auxiliary families share this shape: chain of
/// length l (descending or free), one variable m with denominators (q)_m,
/// quadratic a_m·m² + Σ N_j(N_j+m), linear lin_m·m, tail from tail_start.
#[allow(clippy::too_many_arguments)]
fn aux_m_form(
    coords: ChainCoords,
    l: usize,
    m_name: &str,
    m_parity: Parity,
    a_m: Rat,
    lin_m: Rat,
    m_coupling: Rat,
    tail_start: usize,
    const_exp: Rat,
) -> FermionicFormSpec {
    let n = l + 1;
    let mut quad = zero_matrix(n);
    quad[0][0] = a_m;
    match coords {
        ChainCoords::Descending => chain_identity(&mut quad, 1, l),
        ChainCoords::Free => chain_min_matrix(&mut quad, 1, l),
    }
    couple_chain_sum(&mut quad, coords, 1, l, 0, m_coupling);
    let mut lin = zeros(n);
    lin[0] = lin_m;
    let mut denoms = match coords {
        ChainCoords::Descending => chain_denoms_descending(l),
        ChainCoords::Free => chain_denoms_free(l),
    };
    denoms.push(DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::Extra(0) });
    FermionicFormSpec {
        chain_len: l,
        coords,
        extra_vars: vec![ExtraVar { name: m_name.into(), parity: m_parity }],
        quad,
        lin,
        const_exp,
        tail_start,
        denom_factors: denoms,
        gaussian_factor: None,
        stretch: 1,
    }
}

/// The p=4-style families: chain plus m₁ (denominator (q)_{m₁}) and m₂
/// (Gaussian factor only).
#[allow(clippy::too_many_arguments)]
fn aux_m1m2_form(
    l: usize,
    m1_parity: Parity,
    m2_parity: Parity,
    a_m1: Rat,
    cross_m1m2: Rat,
    lin_m1: Rat,
    lin_m2: Rat,
    chain_lin: Rat,
    tail_start: usize,
    const_exp: Rat,
    gauss_top_m1: Rat,
    gauss_top_const: Rat,
) -> FermionicFormSpec {
    let n = l + 2;
    let mut quad = zero_matrix(n);
    quad[0][0] = a_m1;
    quad[1][1] = rat(1, 2);
    quad[0][1] = cross_m1m2 / 2;
    quad[1][0] = cross_m1m2 / 2;
    chain_min_matrix(&mut quad, 2, l);
    couple_chain_sum(&mut quad, ChainCoords::Free, 2, l, 0, Rat::from_integer(1));
    let mut lin = zeros(n);
    lin[0] = lin_m1;
    lin[1] = lin_m2;
    for j in 0..l {
        lin[2 + j] = chain_lin;
    }
    let mut denoms = chain_denoms_free(l);
    denoms.push(DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::Extra(0) });
    let mut top_coeffs = zeros(n);
    top_coeffs[0] = gauss_top_m1;
    FermionicFormSpec {
        chain_len: l,
        coords: ChainCoords::Free,
        extra_vars: vec![
            ExtraVar { name: "m1".into(), parity: m1_parity },
            ExtraVar { name: "m2".into(), parity: m2_parity },
        ],
        quad,
        lin,
        const_exp,
        tail_start,
        denom_factors: denoms,
        gaussian_factor: Some(GaussianFactor { top_coeffs, top_const: gauss_top_const, bottom: 1 }),
        stretch: 1,
    }
}

/// The M-theorem forms on the p=4 side: chain plus M with denominators
/// (q^{1/2};q)_{M(+1)} (q²;q²)_M, coupling 2M, optional chain linear +1.
#[allow(clippy::too_many_arguments)]
fn thm_p4_form(l: usize, a_m: Rat, lin_m: Rat, chain_lin: Rat, half_len_plus_one: bool, tail_start: usize) -> FermionicFormSpec {
    let n = l + 1;
    let mut quad = zero_matrix(n);
    quad[0][0] = a_m;
    chain_identity(&mut quad, 1, l);
    couple_chain_sum(&mut quad, ChainCoords::Descending, 1, l, 0, Rat::from_integer(2));
    let mut lin = zeros(n);
    lin[0] = lin_m;
    for j in 0..l {
        lin[1 + j] = chain_lin;
    }
    let mut denoms = chain_denoms_descending(l);
    denoms.push(DenomFactor {
        arg: rat(1, 2),
        step: Rat::from_integer(1),
        len: if half_len_plus_one { DenomLen::ExtraPlusOne(0) } else { DenomLen::Extra(0) },
    });
    denoms.push(DenomFactor { arg: Rat::from_integer(2), step: Rat::from_integer(2), len: DenomLen::Extra(0) });
    FermionicFormSpec {
        chain_len: l,
        coords: ChainCoords::Descending,
        extra_vars: vec![ExtraVar { name: "M".into(), parity: Parity::Any }],
        quad,
        lin,
        const_exp: Rat::zero(),
        tail_start,
        denom_factors: denoms,
        gaussian_factor: None,
        stretch: 1,
    }
}

/// The double sums with a Gaussian factor: variables n₁ ((q)_{n₁}) and n₂
/// ([2n₁(+δ); n₂]), quadratic n₁² − n₁n₂ + n₂².
fn asw_form(lin_n1: i64, lin_n2: i64, top_shift: i64) -> FermionicFormSpec {
    let quad = vec![
        vec![Rat::from_integer(1), rat(-1, 2)],
        vec![rat(-1, 2), Rat::from_integer(1)],
    ];
    FermionicFormSpec {
        chain_len: 0,
        coords: ChainCoords::Free,
        extra_vars: vec![
            ExtraVar { name: "n1".into(), parity: Parity::Any },
            ExtraVar { name: "n2".into(), parity: Parity::Any },
        ],
        quad,
        lin: vec![Rat::from_integer(lin_n1), Rat::from_integer(lin_n2)],
        const_exp: Rat::zero(),
        tail_start: 1,
        denom_factors: vec![DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::Extra(0) }],
        gaussian_factor: Some(GaussianFactor {
            top_coeffs: vec![Rat::from_integer(2), Rat::zero()],
            top_const: Rat::from_integer(top_shift),
            bottom: 1,
        }),
        stretch: 1,
    }
}

/// Builds the declarative spec for one family instance.
pub fn build_form(family: FormFamily) -> Result<FermionicFormSpec> {
    match family {
        FormFamily::Ag { k, i } => {
            if k < 2 || i < 1 || i > k {
                return Err(Error::Domain(format!("need k >= 2 and 1 <= i <= k, got k = {k}, i = {i}")));
            }
            let l = (k - 1) as usize;
            let n = l;
            let mut quad = zero_matrix(n);
            chain_identity(&mut quad, 0, l);
            FermionicFormSpec {
                chain_len: l,
                coords: ChainCoords::Descending,
                extra_vars: vec![],
                quad,
                lin: zeros(n),
                const_exp: Rat::zero(),
                tail_start: i as usize,
                denom_factors: chain_denoms_descending(l),
                gaussian_factor: None,
                stretch: 1,
            }
        }
        FormFamily::Thm2_1 { g, s } => {
            check_gs(g, s)?;
            aux_m_form(
                ChainCoords::Descending,
                (g - 1) as usize,
                "M",
                Parity::Any,
                rat(g + 1, 4),
                rat(g - s, 2),
                Rat::from_integer(1),
                s as usize,
                Rat::zero(),
            )
        }
        FormFamily::Thm2_2 { h } => {
            check_h(h)?;
            aux_m_form(
                ChainCoords::Descending,
                (2 * h) as usize,
                "M",
                Parity::Any,
                rat(h + 1, 2),
                rat(h + 1, 2),
                Rat::from_integer(1),
                h as usize + 1,
                Rat::zero(),
            )
        }
        FormFamily::Thm2_3 { g, s } => {
            check_gs(g, s)?;
            aux_m_form(
                ChainCoords::Descending,
                (g - 1) as usize,
                "M",
                Parity::Any,
                rat(g, 4),
                rat(g - s + 1, 2),
                Rat::from_integer(1),
                s as usize,
                Rat::zero(),
            )
        }
        FormFamily::Thm2_4 { h } => {
            check_h(h)?;
            aux_m_form(
                ChainCoords::Descending,
                (2 * h - 1) as usize,
                "M",
                Parity::Any,
                rat(h, 2),
                rat(h, 2),
                Rat::from_integer(1),
                h as usize,
                Rat::zero(),
            )
        }
        FormFamily::Thm2_5 { g, s } => {
            check_gs(g, s)?;
            thm_p4_form((g - 1) as usize, rat(2 * g + 1, 2), Rat::from_integer(g - s), Rat::zero(), false, s as usize)
        }
        FormFamily::Thm2_6 { g } => {
            check_g(g)?;
            thm_p4_form((g - 1) as usize, rat(2 * g + 1, 2), Rat::from_integer(g), Rat::from_integer(1), true, g as usize + 1)
        }
        FormFamily::Thm2_7 { g, s } => {
            check_gs(g, s)?;
            thm_p4_form((g - 1) as usize, Rat::from_integer(g), Rat::from_integer(g + 1 - s), Rat::zero(), false, s as usize)
        }
        FormFamily::Thm2_8 { g } => {
            check_g(g)?;
            thm_p4_form((g - 1) as usize, Rat::from_integer(g), Rat::from_integer(g), Rat::from_integer(1), true, g as usize + 1)
        }
        FormFamily::M37Explicit { k } => {
            // The four written-out rank-3 sums: the g=4, s ∈ {1,3,5} cases
            // and the h=2 case, all in free coordinates over n1..n4 with the
            // printed linear parts.
            let lin: Vec<i64> = match k {
                1 => vec![1, 2, 3, 2],
                2 => vec![0, 0, 1, 1],
                3 => vec![0, 0, 0, 0],
                4 => vec![0, 1, 2, 1],
                _ => return Err(Error::Domain(format!("explicit sum index {k} outside 1..=4"))),
            };
            let n = 4;
            let mut quad = zero_matrix(n);
            chain_min_matrix(&mut quad, 0, 3);
            quad[3][3] = Rat::from_integer(1);
            for a in 0..3 {
                let w = Rat::from_integer((a + 1) as i64) / 2;
                quad[a][3] += w;
                quad[3][a] += w;
            }
            let mut denoms = chain_denoms_free(3);
            denoms.push(DenomFactor { arg: Rat::from_integer(1), step: Rat::from_integer(1), len: DenomLen::Extra(0) });
            // Variable order is extras first, so n4 sits at index 0 and the
            // chain block n1..n3 at 1..3; permute the printed data to match.
            let perm = [3usize, 0, 1, 2];
            let mut quad_p = zero_matrix(n);
            for a in 0..n {
                for b in 0..n {
                    quad_p[a][b] = quad[perm[a]][perm[b]];
                }
            }
            let lin_p: Vec<Rat> = perm.iter().map(|&j| Rat::from_integer(lin[j])).collect();
            FermionicFormSpec {
                chain_len: 3,
                coords: ChainCoords::Free,
                extra_vars: vec![ExtraVar { name: "n4".into(), parity: Parity::Any }],
                quad: quad_p,
                lin: lin_p,
                const_exp: Rat::zero(),
                tail_start: 4,
                denom_factors: denoms,
                gaussian_factor: None,
                stretch: 1,
            }
        }
        FormFamily::Asw { k } => match k {
            1 => asw_form(1, 1, 0),
            2 => asw_form(0, 1, 1),
            3 => asw_form(0, 0, 0),
            4 => asw_form(1, 0, 1),
            _ => return Err(Error::Domain(format!("double-sum index {k} outside 1..=4"))),
        },
        FormFamily::Asw4Alt => asw_form(0, 1, 0),
        FormFamily::Lemma3_1 { g, s, b } => {
            check_gs(g, s)?;
            aux_m_form(
                ChainCoords::Free,
                (g - 1) as usize,
                "m",
                if b { Parity::Odd } else { Parity::Even },
                rat(g + 1, 4),
                rat(g - s, 2),
                Rat::from_integer(1),
                s as usize,
                if b { rat(-3 * g, 4) + rat(s, 2) - rat(1, 4) } else { Rat::zero() },
            )
        }
        FormFamily::Lemma3_2 { h } => {
            check_h(h)?;
            aux_m_form(
                ChainCoords::Free,
                (2 * h) as usize,
                "m",
                Parity::Any,
                rat(h + 1, 2),
                rat(h + 1, 2),
                Rat::from_integer(1),
                h as usize + 1,
                Rat::zero(),
            )
        }
        FormFamily::Lemma3_3 { g, s, b } => {
            check_gs(g, s)?;
            aux_m_form(
                ChainCoords::Free,
                (g - 1) as usize,
                "m",
                if b { Parity::Odd } else { Parity::Even },
                rat(g, 4),
                rat(g - s + 1, 2),
                Rat::from_integer(1),
                s as usize,
                if b { rat(-3 * g, 4) + rat(s, 2) - rat(1, 2) } else { Rat::zero() },
            )
        }
        FormFamily::Lemma3_4 { h } => {
            check_h(h)?;
            aux_m_form(
                ChainCoords::Free,
                (2 * h - 1) as usize,
                "m",
                Parity::Any,
                rat(h, 2),
                rat(h, 2),
                Rat::from_integer(1),
                h as usize,
                Rat::zero(),
            )
        }
        FormFamily::Lemma3_5 { g, s, b } => {
            check_gs(g, s)?;
            aux_m1m2_form(
                (g - 1) as usize,
                Parity::Even,
                if b { Parity::Odd } else { Parity::Even },
                rat(g + 1, 4),
                rat(-1, 2),
                rat(g - s, 2),
                Rat::zero(),
                Rat::zero(),
                s as usize,
                if b { Rat::from_integer(s - 2 * g) - rat(1, 2) } else { Rat::zero() },
                rat(1, 2),
                Rat::zero(),
            )
        }
        FormFamily::Lemma3_6 { g, b } => {
            check_g(g)?;
            aux_m1m2_form(
                (g - 1) as usize,
                Parity::Odd,
                if b { Parity::Odd } else { Parity::Even },
                rat(g + 1, 4),
                rat(-1, 2),
                Rat::zero(),
                rat(-1, 2),
                Rat::zero(),
                g as usize + 1,
                if b { rat(-(g - 1), 4) } else { rat(-(g + 1), 4) },
                rat(1, 2),
                rat(1, 2),
            )
        }
        FormFamily::Lemma3_7 { g, s, b } => {
            check_gs(g, s)?;
            aux_m1m2_form(
                (g - 1) as usize,
                Parity::Even,
                if b { Parity::Odd } else { Parity::Even },
                rat(g, 4),
                Rat::zero(),
                rat(g + 1 - s, 2),
                Rat::zero(),
                Rat::zero(),
                s as usize,
                if b { Rat::from_integer(s - 2 * g) - rat(3, 2) } else { Rat::zero() },
                rat(1, 2),
                Rat::zero(),
            )
        }
        FormFamily::Lemma3_8 { g, b } => {
            check_g(g)?;
            aux_m1m2_form(
                (g - 1) as usize,
                Parity::Odd,
                if b { Parity::Odd } else { Parity::Even },
                rat(g, 4),
                Rat::zero(),
                Rat::zero(),
                Rat::zero(),
                Rat::zero(),
                g as usize + 1,
                if b { rat(-(g + 2), 4) } else { rat(-g, 4) },
                rat(1, 2),
                rat(1, 2),
            )
        }
        FormFamily::Special(tag) => {
            let (base, stretch) = match tag {
                SpecialTag::Eq2_13 => (FormFamily::Thm2_3 { g: 1, s: 1 }, 4),
                SpecialTag::Eq2_14 => (FormFamily::Thm2_3 { g: 1, s: 2 }, 4),
                SpecialTag::Eq2_15 => (FormFamily::Thm2_5 { g: 1, s: 1 }, 2),
                SpecialTag::Eq2_16 => (FormFamily::Thm2_6 { g: 1 }, 2),
                SpecialTag::Eq2_16Alt => (FormFamily::Thm2_5 { g: 1, s: 2 }, 2),
                SpecialTag::Eq2_18 => (FormFamily::Thm2_7 { g: 1, s: 1 }, 2),
                SpecialTag::Eq2_19 => (FormFamily::Thm2_7 { g: 1, s: 2 }, 2),
                SpecialTag::Eq2_20 => (FormFamily::Thm2_8 { g: 1 }, 2),
            };
            let mut spec = build_form(base)?;
            spec.stretch = stretch;
            spec
        }
    }
    .validated()
}

impl FermionicFormSpec {
    fn validated(self) -> Result<FermionicFormSpec> {
        let n = self.num_vars();
        if self.quad.len() != n || self.quad.iter().any(|r| r.len() != n) || self.lin.len() != n {
            return Err(Error::Internal("form spec dimension mismatch".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if self.quad[i][j] != self.quad[j][i] {
                    return Err(Error::Internal("quadratic form is not symmetric".into()));
                }
            }
        }
        if let Some(gf) = &self.gaussian_factor {
            for (i, c) in gf.top_coeffs.iter().enumerate() {
                if !c.is_zero() && i >= gf.bottom {
                    return Err(Error::Internal(
                        "Gaussian top must only involve earlier variables".into(),
                    ));
                }
            }
        }
        Ok(self)
    }
}

/// Perturbs one quadratic-form entry: +1 on a diagonal entry, +1/2 on each
/// of a symmetric off-diagonal pair.  The perturbation keeps the form
/// proper (it only adds a positive multiple of y_i² or y_iy_j), so the
/// mutated sum still evaluates — to a provably different series.  Used as
/// the negative control in verification.
pub fn mutate_quad(spec: &FermionicFormSpec, i: usize, j: usize) -> FermionicFormSpec {
    let mut m = spec.clone();
    if i == j {
        m.quad[i][i] += Rat::from_integer(1);
    } else {
        m.quad[i][j] += rat(1, 2);
        m.quad[j][i] += rat(1, 2);
    }
    m
}

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

/// Quarter-unit integer from a rational with denominator dividing 4.
fn rat4(r: Rat) -> Result<i64> {
    let x = r * 4;
    if !x.is_integer() {
        return Err(Error::Domain(format!("exponent datum {r} is not a multiple of 1/4")));
    }
    Ok(x.to_integer())
}

/// Upper endpoint of { v ≥ 0 : a·v² + b·v ≤ s } for a > 0, or None when
/// the set is empty.  With b < 0 the quadratic dips negative, so the fit
/// interval need not contain 0 — the minimum over integers sits at
/// ⌊−b/2a⌋ or the next integer, and the set is a contiguous interval
/// around it.
fn quad_cap(a: i64, b: i64, s: i64) -> Option<i64> {
    debug_assert!(a > 0);
    let fits = |v: i64| {
        let v = v as i128;
        (a as i128) * v * v + (b as i128) * v <= s as i128
    };
    let vm = (-b).div_euclid(2 * a).max(0);
    let mut v = if fits(vm) {
        vm
    } else if fits(vm + 1) {
        vm + 1
    } else {
        return None;
    };
    while fits(v + 1) {
        v += 1;
    }
    Some(v)
}

/// min over y ≥ 0 of ā·y² + b·y in quarter units, rounded down (ā > 0).
fn lb_term(abar: i64, b: i64) -> i64 {
    if b >= 0 {
        0
    } else {
        let num = (b as i128) * (b as i128);
        let den = 4 * abar as i128;
        -((num + den - 1) / den) as i64
    }
}

struct Evaluator<'s> {
    spec: &'s FermionicFormSpec,
    nvars: usize,
    extras: usize,
    q4: Vec<Vec<i64>>,
    lin4: Vec<i64>,
    const4: i64,
    th4: i64,
    denom: u32,
    d_int: u32,
    w_int: i64,
    /// abar4[k][i] (i ≥ k): diagonal i shifted by the negative couplings
    /// among the unfixed set {k, …, n−1}.
    abar4: Vec<Vec<i64>>,
    /// Denominator factors grouped by the variable whose fixing determines
    /// their length.
    factors_at: Vec<Vec<usize>>,
    gauss_top4: Vec<i64>,
    gauss_top_const4: i64,
    values: Vec<i64>,
    poch_cache: HashMap<(i64, i64, i64), Rc<QSeries>>,
    gauss_cache: HashMap<(i64, i64), Rc<QSeries>>,
    acc: QSeries,
}

impl<'s> Evaluator<'s> {
    fn new(spec: &'s FermionicFormSpec, denom: u32, order: i64, bound_scale: i64) -> Result<Evaluator<'s>> {
        if !matches!(denom, 1 | 2 | 4) {
            return Err(Error::Domain(format!("substrate D = {denom} not supported (use 1, 2 or 4)")));
        }
        if order < 0 {
            return Err(Error::OrderTooSmall { order, what: "fermionic evaluation needs order >= 0".into() });
        }
        let n = spec.num_vars();
        let e = spec.extra_vars.len();
        let sigma = spec.stretch as i64;
        let mut q4 = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                q4[i][j] = rat4(spec.quad[i][j])? * sigma;
            }
        }
        // Fold the tail Σ_{j ≥ tail_start} N_j into the linear form.
        let mut lin4 = Vec::with_capacity(n);
        for (i, l) in spec.lin.iter().enumerate() {
            let mut v = rat4(*l)?;
            if i >= e {
                let j = i - e + 1; // 1-based chain position
                let t = spec.tail_start;
                let coeff = match spec.coords {
                    ChainCoords::Descending => i64::from(j >= t && t <= spec.chain_len),
                    ChainCoords::Free => {
                        if t <= spec.chain_len && j >= t {
                            (j - t + 1) as i64
                        } else {
                            0
                        }
                    }
                };
                v += 4 * coeff;
            }
            lin4.push(v * sigma);
        }
        let const4 = rat4(spec.const_exp)? * sigma;
        let th4 = order * (4 / denom as i64) * bound_scale;

        // Properness: AM-GM-shifted diagonals over every unfixed suffix.
        let mut abar4 = vec![vec![0i64; n]; n + 1];
        for k in 0..=n {
            for i in k..n {
                let mut a = q4[i][i];
                for j in k..n {
                    if j != i && q4[i][j] < 0 {
                        a += q4[i][j];
                    }
                }
                abar4[k][i] = a;
                if k == 0 && a <= 0 {
                    return Err(Error::Domain(format!(
                        "quadratic form not provably proper: shifted diagonal for {} is {}",
                        spec.var_name(i),
                        Rat::new(a, 4)
                    )));
                }
            }
        }

        // Internal grid: the coarsest substrate carrying every denominator
        // factor (Gaussian polynomials are integral, so they never matter).
        let mut d_int = 1u32;
        for f in &spec.denom_factors {
            for r in [f.arg, f.step] {
                let e4 = rat4(r)? * sigma;
                if e4 % 4 != 0 {
                    d_int = d_int.max(if e4 % 2 == 0 { 2 } else { 4 });
                }
            }
        }
        if denom % d_int != 0 {
            return Err(Error::ExponentOffSubstrate(
                format!("denominator factors need D divisible by {d_int}"),
                denom,
            ));
        }
        let w_int = (order * d_int as i64).div_euclid(denom as i64) + 1;

        // Group factors by determining variable.
        let mut factors_at = vec![Vec::new(); n];
        for (fi, f) in spec.denom_factors.iter().enumerate() {
            let det = match f.len {
                DenomLen::Extra(u) | DenomLen::ExtraPlusOne(u) => {
                    if u >= e {
                        return Err(Error::Internal("denominator references missing auxiliary variable".into()));
                    }
                    u
                }
                DenomLen::ChainVar(j) => {
                    if spec.coords != ChainCoords::Free || j < 1 || j > spec.chain_len {
                        return Err(Error::Internal("chain-variable denominator outside free chain".into()));
                    }
                    e + j - 1
                }
                DenomLen::ChainDiff(j) => {
                    if spec.coords != ChainCoords::Descending || j < 1 || j + 1 > spec.chain_len {
                        return Err(Error::Internal("chain-difference denominator outside descending chain".into()));
                    }
                    e + j
                }
                DenomLen::ChainLast => {
                    if spec.coords != ChainCoords::Descending || spec.chain_len == 0 {
                        return Err(Error::Internal("chain-last denominator without a chain".into()));
                    }
                    e + spec.chain_len - 1
                }
            };
            factors_at[det].push(fi);
        }

        let (gauss_top4, gauss_top_const4) = match &spec.gaussian_factor {
            Some(gf) => {
                let mut c4 = Vec::with_capacity(n);
                for c in &gf.top_coeffs {
                    c4.push(rat4(*c)?);
                }
                (c4, rat4(gf.top_const)?)
            }
            None => (vec![0; n], 0),
        };

        Ok(Evaluator {
            spec,
            nvars: n,
            extras: e,
            q4,
            lin4,
            const4,
            th4,
            denom,
            d_int,
            w_int,
            abar4,
            factors_at,
            gauss_top4,
            gauss_top_const4,
            values: vec![0; n],
            poch_cache: HashMap::new(),
            gauss_cache: HashMap::new(),
            acc: QSeries::zero(denom, order),
        })
    }

    /// Inverted (q^arg; q^step)_len on the internal grid, cached.
    fn inv_poch(&mut self, arg4: i64, step4: i64, len: i64) -> Result<Rc<QSeries>> {
        if let Some(s) = self.poch_cache.get(&(arg4, step4, len)) {
            return Ok(Rc::clone(s));
        }
        let a = QMonomial { sign: 1, exp: Rat::new(arg4, 4) };
        let z = QMonomial { sign: 1, exp: Rat::new(step4, 4) };
        let p = poch_finite_signed(a, z, len as u32, self.d_int, self.w_int)?;
        let inv = Rc::new(p.invert()?);
        self.poch_cache.insert((arg4, step4, len), Rc::clone(&inv));
        Ok(inv)
    }

    /// Gaussian polynomial [p; n] on the internal grid, window-adjusted.
    fn gauss_poly(&mut self, p: i64, n: i64) -> Rc<QSeries> {
        if let Some(s) = self.gauss_cache.get(&(p, n)) {
            return Rc::clone(s);
        }
        let mut g = gaussian(p, n);
        if self.spec.stretch > 1 {
            g = g.stretch(self.spec.stretch);
        }
        let g = g.refine_denom(self.d_int);
        let g = if g.order() > self.w_int {
            g.truncate(self.w_int)
        } else {
            g.extend_known_zero(self.w_int)
        };
        let g = Rc::new(g);
        self.gauss_cache.insert((p, n), Rc::clone(&g));
        g
    }

    /// Multiplies in every factor determined by fixing variable k to v.
    fn attach(&mut self, k: usize, v: i64, carried: &Rc<QSeries>) -> Result<Rc<QSeries>> {
        let sigma = self.spec.stretch as i64;
        let mut cur = Rc::clone(carried);
        for fi in self.factors_at[k].clone() {
            let DenomFactor { arg, step, len } = self.spec.denom_factors[fi].clone();
            let len = match len {
                DenomLen::Extra(_) | DenomLen::ChainVar(_) | DenomLen::ChainLast => v,
                DenomLen::ExtraPlusOne(_) => v + 1,
                DenomLen::ChainDiff(j) => self.values[self.extras + j - 1] - v,
            };
            debug_assert!(len >= 0);
            if len == 0 {
                continue;
            }
            let arg4 = rat4(arg)? * sigma;
            let step4 = rat4(step)? * sigma;
            let inv = self.inv_poch(arg4, step4, len)?;
            cur = Rc::new(cur.mul(&inv)?);
        }
        if self.spec.gaussian_factor.as_ref().map(|gf| gf.bottom) == Some(k) {
            let mut t4 = self.gauss_top_const4;
            for i in 0..k {
                t4 += self.gauss_top4[i] * self.values[i];
            }
            t4 += self.gauss_top4[k] * v;
            if t4 % 4 != 0 {
                return Err(Error::Internal("Gaussian top is not an integer here".into()));
            }
            let poly = self.gauss_poly(t4 / 4, v);
            cur = Rc::new(cur.mul(&poly)?);
        }
        Ok(cur)
    }

    /// Upper bound on variable k's value from the Gaussian support
    /// constraint 0 ≤ bottom ≤ top, when applicable.
    fn gaussian_cap(&self, k: usize) -> Option<i64> {
        let gf = self.spec.gaussian_factor.as_ref()?;
        if gf.bottom != k {
            return None;
        }
        let mut t4 = self.gauss_top_const4;
        for (i, c) in self.gauss_top4.iter().enumerate() {
            if i < k {
                t4 += c * self.values[i];
            }
        }
        Some(t4.div_euclid(4))
    }

    fn dfs(&mut self, k: usize, exp4: i64, bfix4: &[i64], carried: &Rc<QSeries>) -> Result<()> {
        if k == self.nvars {
            if exp4 > self.th4 {
                return Ok(());
            }
            let num = exp4 * self.denom as i64;
            if num % 4 != 0 {
                return Err(Error::ExponentOffSubstrate(
                    format!("q^{}", Rat::new(exp4, 4)),
                    self.denom,
                ));
            }
            let t_exp = num / 4;
            if t_exp < 0 {
                return Err(Error::Internal(format!(
                    "negative exponent q^{} reached; form is not normalised",
                    Rat::new(exp4, 4)
                )));
            }
            self.acc.add_assign_spread(carried, t_exp);
            return Ok(());
        }

        // Hard cap on v: with the AM-GM-shifted diagonals over {k..}, the
        // exponent of any completion is at least
        //   exp4 + ā_k v² + b_k v + Σ_{i>k} min_y(ā_i y² + b_i y),
        // so v can only contribute while the first quadratic fits in the
        // slack left by the others.
        let mut slack = self.th4 - exp4;
        for i in (k + 1)..self.nvars {
            slack -= lb_term(self.abar4[k][i], bfix4[i]);
        }
        let cap0 = match quad_cap(self.abar4[k][k], bfix4[k], slack) {
            Some(c) => c,
            None => return Ok(()),
        };
        let mut cap = cap0;
        if k > self.extras && self.spec.coords == ChainCoords::Descending {
            cap = cap.min(self.values[k - 1]);
        }
        if let Some(gc) = self.gaussian_cap(k) {
            cap = cap.min(gc);
        }
        let parity = if k < self.extras { self.spec.extra_vars[k].parity } else { Parity::Any };

        for v in 0..=cap {
            if !parity.admits(v) {
                continue;
            }
            let exp4v = exp4 + self.q4[k][k] * v * v + bfix4[k] * v;
            // Sharper per-value test with v's couplings made exact.
            let mut bnext = bfix4.to_vec();
            for (i, b) in bnext.iter_mut().enumerate().skip(k + 1) {
                *b += 2 * self.q4[i][k] * v;
            }
            let mut lb = exp4v;
            for i in (k + 1)..self.nvars {
                lb += lb_term(self.abar4[k + 1][i], bnext[i]);
            }
            if lb > self.th4 {
                continue;
            }
            self.values[k] = v;
            let cur = self.attach(k, v, carried)?;
            self.dfs(k + 1, exp4v, &bnext, &cur)?;
        }
        Ok(())
    }

    fn run(mut self) -> Result<QSeries> {
        let one = Rc::new(QSeries::one(self.d_int, self.w_int));
        let b0 = self.lin4.clone();
        self.dfs(0, self.const4, &b0, &one)?;
        Ok(self.acc)
    }
}

/// Evaluates the multisum exactly through t^order on substrate D.
pub fn eval_form(spec: &FermionicFormSpec, denom: u32, order: i64) -> Result<QSeries> {
    Evaluator::new(spec, denom, order, 1)?.run()
}

/// Evaluates twice — once normally and once with the pruning threshold
/// doubled — and demands identical output, catching any unsound pruning.
pub fn eval_form_certified(spec: &FermionicFormSpec, denom: u32, order: i64) -> Result<QSeries> {
    let base = Evaluator::new(spec, denom, order, 1)?.run()?;
    let wide = Evaluator::new(spec, denom, order, 2)?.run()?;
    if base != wide {
        return Err(Error::PruningCertificate(
            "doubled-threshold enumeration produced different coefficients".into(),
        ));
    }
    Ok(base)
}

// ---------------------------------------------------------------------------
// Change-of-coordinates check
// ---------------------------------------------------------------------------

/// The matrix with entries min(j, ℓ) — the quadratic form of Σ_j N_j²
/// in free coordinates.
pub fn min_matrix(l: usize) -> Vec<Vec<i64>> {
    (1..=l)
        .map(|a| (1..=l).map(|b| a.min(b) as i64).collect())
        .collect()
}

/// Checks Σ_j N_j² = nᵀ·B·n (N_j = n_j + … + n_{g−1}) for 50 deterministic
/// pseudorandom nonnegative vectors n, with B the given matrix.
pub fn bmatrix_check_matrix(g: i64, b: &[Vec<i64>]) -> bool {
    if g < 2 {
        return false;
    }
    let l = (g - 1) as usize;
    if b.len() != l || b.iter().any(|r| r.len() != l) {
        return false;
    }
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 10) as i64
    };
    for _ in 0..50 {
        let n: Vec<i64> = (0..l).map(|_| next()).collect();
        let mut lhs = 0i64;
        for j in 0..l {
            let nj: i64 = n[j..].iter().sum();
            lhs += nj * nj;
        }
        let mut rhs = 0i64;
        for i in 0..l {
            for j in 0..l {
                rhs += b[i][j] * n[i] * n[j];
            }
        }
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Checks the min(j,ℓ) matrix against the chain change of coordinates.
pub fn bmatrix_check(g: i64) -> bool {
    bmatrix_check_matrix(g, &min_matrix((g - 1).max(0) as usize))
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn rat_str(r: Rat) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn affine_str(spec: &FermionicFormSpec, coeffs: &[Rat], c: Rat) -> String {
    let mut parts = Vec::new();
    for (i, k) in coeffs.iter().enumerate() {
        if k.is_zero() {
            continue;
        }
        let name = spec.var_name(i);
        if *k == Rat::from_integer(1) {
            parts.push(name);
        } else {
            parts.push(format!("{}*{}", rat_str(*k), name));
        }
    }
    if !c.is_zero() || parts.is_empty() {
        parts.push(rat_str(c));
    }
    parts.join(" + ")
}

fn denom_len_str(spec: &FermionicFormSpec, len: DenomLen) -> String {
    match len {
        DenomLen::Extra(u) => spec.extra_vars[u].name.clone(),
        DenomLen::ExtraPlusOne(u) => format!("{}+1", spec.extra_vars[u].name),
        DenomLen::ChainVar(j) => format!("n{j}"),
        DenomLen::ChainDiff(j) => format!("N{}-N{}", j, j + 1),
        DenomLen::ChainLast => format!("N{}", spec.chain_len),
    }
}

/// JSON rendering of a form spec (the `dump-form` payload).
pub fn spec_to_json(spec: &FermionicFormSpec) -> Value {
    json!({
        "chain_len": spec.chain_len,
        "extra_vars": spec.extra_vars.iter().map(|v| json!({
            "name": v.name,
            "parity": v.parity.name(),
        })).collect::<Vec<_>>(),
        "quad": spec.quad.iter()
            .map(|row| row.iter().map(|r| rat_str(*r)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "lin": spec.lin.iter().map(|r| rat_str(*r)).collect::<Vec<_>>(),
        "const": rat_str(spec.const_exp),
        "tail_start": spec.tail_start,
        "denom_factors": spec.denom_factors.iter().map(|f| json!({
            "arg": rat_str(f.arg),
            "step": rat_str(f.step),
            "length": denom_len_str(spec, f.len),
        })).collect::<Vec<_>>(),
        "gaussian_factor": spec.gaussian_factor.as_ref().map(|gf| json!({
            "top": affine_str(spec, &gf.top_coeffs, gf.top_const),
            "bottom": spec.var_name(gf.bottom),
        })),
        "stretch": spec.stretch,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{bosonic, combo_shift, FieldLabel, ModelLabel};
    use crate::qfunctions::exp_to_t;

    fn coeffs_q(s: &QSeries, through: i64) -> Vec<i64> {
        (0..=through)
            .map(|n| i64::try_from(&s.coeff_q(n).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn single_variable_chain_matches_first_rogers_ramanujan_pair() {
        let f2 = eval_form(&build_form(FormFamily::Ag { k: 2, i: 2 }).unwrap(), 1, 20).unwrap();
        assert_eq!(coeffs_q(&f2, 6), vec![1, 1, 1, 1, 2, 2, 3]);
        let f1 = eval_form(&build_form(FormFamily::Ag { k: 2, i: 1 }).unwrap(), 1, 20).unwrap();
        assert_eq!(coeffs_q(&f1, 6), vec![1, 0, 1, 1, 1, 1, 2]);
        // Same values as the two (2,5) characters.
        let m = ModelLabel::virasoro(2, 5).unwrap();
        assert_eq!(f2, bosonic(&m, &FieldLabel::new(&m, 1, 2).unwrap(), 20).unwrap());
        assert_eq!(f1, bosonic(&m, &FieldLabel::new(&m, 1, 1).unwrap(), 20).unwrap());
    }

    #[test]
    fn h1_chain_sum_counts_partitions_avoiding_multiples_of_five() {
        let s = eval_form(&build_form(FormFamily::Thm2_2 { h: 1 }).unwrap(), 1, 14).unwrap();
        assert_eq!(coeffs_q(&s, 5), vec![1, 1, 2, 3, 5, 6]);
    }

    #[test]
    fn explicit_rank3_sum_has_the_printed_low_coefficients() {
        let s = eval_form(&build_form(FormFamily::M37Explicit { k: 1 }).unwrap(), 1, 20).unwrap();
        assert_eq!(coeffs_q(&s, 5), vec![1, 0, 1, 2, 3, 3]);
    }

    #[test]
    fn double_sum_with_gaussian_equals_rank3_sum() {
        for (k, fam) in [
            (1, FormFamily::Asw { k: 1 }),
            (2, FormFamily::Asw { k: 2 }),
            (3, FormFamily::Asw { k: 3 }),
            (4, FormFamily::Asw { k: 4 }),
        ] {
            let asw = eval_form(&build_form(fam).unwrap(), 1, 25).unwrap();
            let m37 = eval_form(&build_form(FormFamily::M37Explicit { k }).unwrap(), 1, 25).unwrap();
            assert_eq!(asw, m37, "pair {k}");
        }
        let alt = eval_form(&build_form(FormFamily::Asw4Alt).unwrap(), 1, 25).unwrap();
        let m374 = eval_form(&build_form(FormFamily::M37Explicit { k: 4 }).unwrap(), 1, 25).unwrap();
        assert_eq!(alt, m374);
    }

    #[test]
    fn lemma_parity_split_reassembles_the_theorem_form() {
        // p' = 3g+2 side, g = 2, s = 1: p' = 8 is even with p'/2 − s = 3 odd,
        // so the halves survive and the series live on D = 2.
        let g = 2;
        let s = 1;
        let d = 2u32;
        let order = 15 * d as i64;
        let a = eval_form(&build_form(FormFamily::Lemma3_3 { g, s, b: false }).unwrap(), d, order).unwrap();
        let b = eval_form(&build_form(FormFamily::Lemma3_3 { g, s, b: true }).unwrap(), d, order).unwrap();
        let shift = exp_to_t(combo_shift(3, 3 * g + 2, s), d).unwrap();
        let combined = a.add(&b.mul_monomial(1, shift).truncate(order)).unwrap();
        let thm = eval_form(&build_form(FormFamily::Thm2_3 { g, s }).unwrap(), d, order).unwrap();
        assert_eq!(combined, thm);
    }

    #[test]
    fn gaussian_lemma_split_reassembles_the_theorem_form() {
        let g = 2;
        let s = 1;
        let d = 2u32;
        let order = 15 * d as i64;
        let a = eval_form(&build_form(FormFamily::Lemma3_5 { g, s, b: false }).unwrap(), d, order).unwrap();
        let b = eval_form(&build_form(FormFamily::Lemma3_5 { g, s, b: true }).unwrap(), d, order).unwrap();
        let shift = exp_to_t(combo_shift(4, 4 * g + 1, s), d).unwrap();
        let combined = a.add(&b.mul_monomial(1, shift).truncate(order)).unwrap();
        let thm = eval_form(&build_form(FormFamily::Thm2_5 { g, s }).unwrap(), d, order).unwrap();
        assert_eq!(combined, thm);
    }

    #[test]
    fn swapped_gaussian_lemma_split_reassembles_theorem_2_6() {
        // Here the roles are reversed: the b-form is χ_{1,2g} and the a-form
        // is χ_{3,2g} under the label symmetry, so the combination with
        // shift q^(1/2) is b + q^(1/2)·a.
        let g = 2;
        let d = 2u32;
        let order = 15 * d as i64;
        let a = eval_form(&build_form(FormFamily::Lemma3_6 { g, b: false }).unwrap(), d, order).unwrap();
        let b = eval_form(&build_form(FormFamily::Lemma3_6 { g, b: true }).unwrap(), d, order).unwrap();
        let combined = b.add(&a.mul_monomial(1, 1).truncate(order)).unwrap();
        let thm = eval_form(&build_form(FormFamily::Thm2_6 { g }).unwrap(), d, order).unwrap();
        assert_eq!(combined, thm);
    }

    #[test]
    fn theorem_constant_terms_are_one() {
        let forms = [
            FormFamily::Thm2_1 { g: 3, s: 2 },
            FormFamily::Thm2_2 { h: 2 },
            FormFamily::Thm2_3 { g: 3, s: 4 },
            FormFamily::Thm2_4 { h: 2 },
            FormFamily::Thm2_5 { g: 2, s: 2 },
            FormFamily::Thm2_6 { g: 2 },
            FormFamily::Thm2_7 { g: 2, s: 3 },
            FormFamily::Thm2_8 { g: 2 },
        ];
        for fam in forms {
            let d = match fam {
                FormFamily::Thm2_1 { .. } | FormFamily::Thm2_3 { .. } => 4,
                FormFamily::Thm2_2 { .. } | FormFamily::Thm2_4 { .. } => 1,
                _ => 2,
            };
            let s = eval_form(&build_form(fam).unwrap(), d, 8 * d as i64).unwrap();
            assert_eq!(coeffs_q(&s, 0), vec![1], "{fam:?}");
        }
    }

    #[test]
    fn lemma_b_forms_normalise_to_constant_term_one() {
        for (fam, d) in [
            (FormFamily::Lemma3_1 { g: 2, s: 1, b: true }, 1),
            (FormFamily::Lemma3_3 { g: 3, s: 2, b: true }, 1),
            (FormFamily::Lemma3_5 { g: 2, s: 2, b: true }, 1),
            (FormFamily::Lemma3_6 { g: 2, b: true }, 1),
            (FormFamily::Lemma3_7 { g: 2, s: 1, b: true }, 1),
            (FormFamily::Lemma3_8 { g: 2, b: true }, 1),
        ] {
            let s = eval_form(&build_form(fam).unwrap(), d, 8).unwrap();
            assert_eq!(coeffs_q(&s, 0), vec![1], "{fam:?}");
        }
    }

    #[test]
    fn stretched_forms_match_their_base_theorems() {
        // Substituted identities evaluate to the base series reindexed.
        let base = eval_form(&build_form(FormFamily::Thm2_3 { g: 1, s: 1 }).unwrap(), 4, 40).unwrap();
        let special = eval_form(&build_form(FormFamily::Special(SpecialTag::Eq2_13)).unwrap(), 1, 40).unwrap();
        for e in 0..=40 {
            assert_eq!(special.coeff_at(e).unwrap(), base.coeff_at(e).unwrap(), "t^{e}");
        }
        let base = eval_form(&build_form(FormFamily::Thm2_7 { g: 1, s: 1 }).unwrap(), 2, 30).unwrap();
        let special = eval_form(&build_form(FormFamily::Special(SpecialTag::Eq2_18)).unwrap(), 1, 30).unwrap();
        for e in 0..=30 {
            assert_eq!(special.coeff_at(e).unwrap(), base.coeff_at(e).unwrap(), "t^{e}");
        }
    }

    #[test]
    fn certified_evaluation_agrees_with_plain() {
        for (fam, d) in [
            (FormFamily::Thm2_1 { g: 3, s: 1 }, 4u32),
            (FormFamily::Thm2_2 { h: 2 }, 1),
            (FormFamily::Asw { k: 2 }, 1),
            (FormFamily::Lemma3_6 { g: 3, b: false }, 1),
        ] {
            let spec = build_form(fam).unwrap();
            let order = 12 * d as i64;
            let certified = eval_form_certified(&spec, d, order).unwrap();
            let plain = eval_form(&spec, d, order).unwrap();
            assert_eq!(certified, plain, "{fam:?}");
        }
    }

    #[test]
    fn mutated_quadratic_form_changes_the_series() {
        let spec = build_form(FormFamily::Thm2_2 { h: 1 }).unwrap();
        let orig = eval_form(&spec, 1, 20).unwrap();
        let mutated = eval_form(&mutate_quad(&spec, 0, 0), 1, 20).unwrap();
        assert_ne!(orig, mutated);
        let crossed = eval_form(&mutate_quad(&spec, 0, 1), 1, 20).unwrap();
        assert_ne!(orig, crossed);
    }

    #[test]
    fn change_of_coordinates_matrix_is_min() {
        assert!(bmatrix_check(2));
        assert!(bmatrix_check(5));
        let mut bad = min_matrix(4);
        bad[1][2] += 1;
        assert!(!bmatrix_check_matrix(5, &bad));
    }

    #[test]
    fn out_of_domain_parameters_are_rejected() {
        assert!(build_form(FormFamily::Thm2_1 { g: 0, s: 1 }).is_err());
        assert!(build_form(FormFamily::Thm2_1 { g: 2, s: 4 }).is_err());
        assert!(build_form(FormFamily::Ag { k: 1, i: 1 }).is_err());
        assert!(build_form(FormFamily::Asw { k: 5 }).is_err());
    }

    #[test]
    fn spec_json_has_the_documented_keys() {
        let spec = build_form(FormFamily::Lemma3_5 { g: 2, s: 1, b: false }).unwrap();
        let v = spec_to_json(&spec);
        for key in ["chain_len", "extra_vars", "quad", "lin", "const", "tail_start", "denom_factors", "gaussian_factor", "stretch"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["gaussian_factor"]["bottom"], "m2");
        assert_eq!(v["gaussian_factor"]["top"], "1/2*m1");
        assert_eq!(v["quad"][0][1], "-1/4");
    }
}
