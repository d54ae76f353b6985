//! Finding values `p*z^2` inside rank-1 and rank-2 progressions.
//!
//! Rank 1 uses the quadratic window construction: a residue root `z0` of
//! `p*z^2 = r (mod q)` turns membership into landing `p*q*x0^2 + 2*p*z0*x0`
//! inside `[t, t+L]`, which the smallest admissible `x0` either does or
//! does not. Rank 2 searches the root's quadratic values for one that
//! splits as `q1*x1 + q2*x2` with both coordinates in range.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_i128, integer_sqrt, is_perfect_square, mod_inverse};
use crate::error::Error;
use crate::gap::Gap;
use crate::Result;

/// The progression {r + q*x : 0 <= x <= L} searched for a value p*z^2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApSquareInstance {
    pub r: i128,
    pub q: i128,
    #[serde(rename = "L")]
    pub l: u64,
    pub p: i128,
}

impl ApSquareInstance {
    pub fn new(r: i128, q: i128, l: u64, p: i128) -> Result<Self> {
        if q < 1 || p < 1 {
            return Err(Error::InvalidInput("step and multiplier must be positive".into()));
        }
        Ok(ApSquareInstance { r, q, l, p })
    }
}

/// A verified hit: p*z^2 = r + q*x with x in [0, L]. `constructive` is
/// false when only the direct scan found it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApHit {
    pub z: i128,
    pub x: i128,
    pub constructive: bool,
}

/// Smallest z in [0, q) with p*z^2 = r (mod q).
pub fn smallest_residue_root(p: i128, r: i128, q: i128) -> Option<i128> {
    (0..q).find(|&z| (p * z * z - r).rem_euclid(q) == 0)
}

/// All roots in [0, q), ascending.
fn residue_roots(p: i128, r: i128, q: i128) -> Vec<i128> {
    (0..q).filter(|&z| (p * z * z - r).rem_euclid(q) == 0).collect()
}

/// Find the smallest-x0 value p*(z0 + q*x0)^2 in the progression, falling
/// back to a direct scan of all L+1 values when the window misses.
///
/// The window step: with t = (r - p*z0^2)/q, the progression coordinate of
/// p*(z0 + q*x0)^2 is W(x0) = p*q*x0^2 + 2*p*z0*x0 - t, increasing in x0;
/// take the smallest x0 with W(x0) >= 0 and accept iff W(x0) <= L.
pub fn find_pz2_in_ap(inst: &ApSquareInstance) -> Result<Option<ApHit>> {
    let (r, q, p) = (inst.r, inst.q, inst.p);
    let l = inst.l as i128;
    let z0 = smallest_residue_root(p, r, q).ok_or(Error::NoResidueRoot)?;
    let t = (r - p * z0 * z0) / q;
    let wit = |x0: i128| p * q * x0 * x0 + 2 * p * z0 * x0 - t;
    let mut x0 = if t <= 0 {
        0
    } else {
        integer_sqrt((t / (p * q)) as u128) as i128
    };
    while x0 > 0 && wit(x0 - 1) >= 0 {
        x0 -= 1;
    }
    while wit(x0) < 0 {
        x0 += 1;
    }
    if wit(x0) <= l {
        let z = z0 + q * x0;
        let x = wit(x0);
        debug_assert_eq!(p * z * z, r + q * x);
        return Ok(Some(ApHit { z, x, constructive: true }));
    }
    for x in 0..=l {
        let v = r + q * x;
        if v >= 0 && v % p == 0 && is_perfect_square((v / p) as u128) {
            let z = integer_sqrt((v / p) as u128) as i128;
            debug_assert_eq!(p * z * z, v);
            return Ok(Some(ApHit { z, x, constructive: false }));
        }
    }
    Ok(None)
}

/// Scan every progression value for p*(square); smallest (z, x) or none.
pub fn exhaustive_ap_scan(inst: &ApSquareInstance, budget: u64) -> Result<Option<(i128, i128)>> {
    if inst.l >= budget {
        return Err(Error::BudgetExceeded {
            what: "progression scan",
            needed: inst.l as u128 + 1,
            limit: budget as u128,
        });
    }
    for x in 0..=inst.l as i128 {
        let v = inst.r + inst.q * x;
        if v >= 0 && v % inst.p == 0 && is_perfect_square((v / inst.p) as u128) {
            return Ok(Some((integer_sqrt((v / inst.p) as u128) as i128, x)));
        }
    }
    Ok(None)
}

/// The set {r + q*(q1*x1 + q2*x2) : 0 <= xi <= Li} searched for p*w^2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap2SquareInstance {
    pub r: i128,
    pub q: i128,
    pub q1: i128,
    pub q2: i128,
    #[serde(rename = "L1")]
    pub l1: u64,
    #[serde(rename = "L2")]
    pub l2: u64,
    pub p: i128,
}

impl Gap2SquareInstance {
    pub fn new(r: i128, q: i128, q1: i128, q2: i128, l1: u64, l2: u64, p: i128) -> Result<Self> {
        if q < 1 || p < 1 || q1 < 1 || q2 < 1 {
            return Err(Error::InvalidInput("steps and multiplier must be positive".into()));
        }
        if gcd_i128(q1, q2) != 1 {
            return Err(Error::InvalidInput(format!(
                "generators {q1} and {q2} share a factor"
            )));
        }
        Ok(Gap2SquareInstance { r, q, q1, q2, l1, l2, p })
    }

    fn element(&self, x1: i128, x2: i128) -> i128 {
        self.r + self.q * (self.q1 * x1 + self.q2 * x2)
    }
}

/// Which search pass produced a rank-2 hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Iz,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap2Hit {
    pub w: i128,
    pub x1: i128,
    pub x2: i128,
    pub window: Window,
}

/// Smallest x1 = x1_res (mod q2) with q1*x1 <= v and (v - q1*x1)/q2 in
/// [0, l2]; coordinates of v = q1*x1 + q2*x2 if any exist. q1, q2 coprime.
fn solve_two_coords(v: i128, q1: i128, q2: i128, l1: i128, l2: i128) -> Option<(i128, i128)> {
    if v < 0 {
        return None;
    }
    let inv = mod_inverse(q1, q2)?;
    let x1_res = (v.rem_euclid(q2) * inv).rem_euclid(q2);
    let deficit = v - q2 * l2;
    let lo = if deficit <= 0 { 0 } else { (deficit + q1 - 1) / q1 };
    let hi = (v / q1).min(l1);
    if lo > hi {
        return None;
    }
    let x1 = lo + (x1_res - lo).rem_euclid(q2);
    if x1 > hi {
        return None;
    }
    let x2 = (v - q1 * x1) / q2;
    debug_assert_eq!((v - q1 * x1).rem_euclid(q2), 0);
    debug_assert!((0..=l2).contains(&x2));
    Some((x1, x2))
}

/// Search for p*w^2 inside the rank-2 set: first the narrow window around
/// the smallest root (least-representative coordinate check), then the full
/// feasible range over every residue root, smallest w wins.
pub fn find_pz2_in_gap2(inst: &Gap2SquareInstance) -> Result<Option<Gap2Hit>> {
    let (r, q, p) = (inst.r, inst.q, inst.p);
    let z0 = smallest_residue_root(p, r, q).ok_or(Error::NoResidueRoot)?;
    // arrange q2*L2 >= q1*L1; coordinates are swapped back on return
    let swapped = inst.q2 * (inst.l2 as i128) < inst.q1 * inst.l1 as i128;
    let (q1, l1, q2, l2) = if swapped {
        (inst.q2, inst.l2 as i128, inst.q1, inst.l1 as i128)
    } else {
        (inst.q1, inst.l1 as i128, inst.q2, inst.l2 as i128)
    };
    let a = p * q;
    let t = (r - p * z0 * z0) / q;
    let b = 2 * p * z0;

    // narrow pass: z in [sqrt((q1*l1/4 + t)/a) + 1, sqrt((q2*l2 + q1*l1/8 + t)/a) - 1]
    let hi_arg = (q2 * l2) as f64 + (q1 * l1) as f64 / 8.0 + t as f64;
    if hi_arg >= 0.0 {
        let lo_arg = ((q1 * l1) as f64 / 4.0 + t as f64).max(0.0);
        let z_lo = ((lo_arg / a as f64).sqrt() + 1.0).ceil() as i128;
        let z_hi = ((hi_arg / a as f64).sqrt() - 1.0).floor() as i128;
        for z in z_lo..=z_hi {
            let v = a * z * z + b * z - t;
            if v < 0 {
                continue;
            }
            let inv = mod_inverse(q1, q2).expect("generators are coprime");
            let x1 = (v.rem_euclid(q2) * inv).rem_euclid(q2);
            if x1 > l1 || q1 * x1 > v {
                continue;
            }
            let x2 = (v - q1 * x1) / q2;
            if x2 > l2 {
                continue;
            }
            let w = z0 + q * z;
            let (x1, x2) = if swapped { (x2, x1) } else { (x1, x2) };
            debug_assert_eq!(p * w * w, inst.element(x1, x2));
            return Ok(Some(Gap2Hit { w, x1, x2, window: Window::Iz }));
        }
    }

    // full pass: every root, every z with value in [0, q1*l1 + q2*l2]
    let vmax = q1 * l1 + q2 * l2;
    let mut best: Option<(i128, i128, i128)> = None;
    for z0p in residue_roots(p, r, q) {
        let bp = 2 * p * z0p;
        let tp = (r - p * z0p * z0p) / q;
        let val = |z: i128| a * z * z + bp * z - tp;
        let mut z = if tp <= 0 {
            0
        } else {
            integer_sqrt((tp / a) as u128) as i128
        };
        while z > 0 && val(z - 1) >= 0 {
            z -= 1;
        }
        while val(z) < 0 {
            z += 1;
        }
        while val(z) <= vmax {
            if let Some((x1, x2)) = solve_two_coords(val(z), q1, q2, l1, l2) {
                let w = z0p + q * z;
                if best.is_none_or(|(bw, _, _)| w < bw) {
                    best = Some((w, x1, x2));
                }
                break; // values rise with z, so this is the class minimum
            }
            z += 1;
        }
    }
    Ok(best.map(|(w, x1, x2)| {
        let (x1, x2) = if swapped { (x2, x1) } else { (x1, x2) };
        debug_assert_eq!(p * w * w, inst.element(x1, x2));
        Gap2Hit { w, x1, x2, window: Window::Full }
    }))
}

/// Enumerate the whole rank-2 set; smallest (w, x1, x2) with p*w^2 equal to
/// an element, or none.
pub fn exhaustive_gap2_scan(
    inst: &Gap2SquareInstance,
    budget: u64,
) -> Result<Option<(i128, i128, i128)>> {
    let size = (inst.l1 as u128 + 1) * (inst.l2 as u128 + 1);
    if size > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "rank-2 scan",
            needed: size,
            limit: budget as u128,
        });
    }
    let mut best: Option<(i128, i128, i128)> = None;
    for x1 in 0..=inst.l1 as i128 {
        for x2 in 0..=inst.l2 as i128 {
            let v = inst.element(x1, x2);
            if v >= 0 && v % inst.p == 0 && is_perfect_square((v / inst.p) as u128) {
                let w = integer_sqrt((v / inst.p) as u128) as i128;
                let cand = (w, x1, x2);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
    }
    Ok(best)
}

/// Coordinates of `value` inside a rank <= 2 progression, or none.
pub fn verify_gap_membership(gap: &Gap, value: i128) -> Option<Vec<i128>> {
    match gap.rank() {
        0 => (value == gap.offset).then(Vec::new),
        1 => {
            let s = gap.steps[0];
            let l = gap.sizes[0] as i128;
            let d = value - gap.offset;
            if d % s != 0 {
                return None;
            }
            let x = d / s;
            (0..=l).contains(&x).then(|| vec![x])
        }
        2 => {
            // reflect negative steps so both point up, then reduce by the gcd
            let mut off = gap.offset;
            let mut s = [gap.steps[0], gap.steps[1]];
            let l = [gap.sizes[0] as i128, gap.sizes[1] as i128];
            let mut flip = [false, false];
            for i in 0..2 {
                if s[i] < 0 {
                    off += s[i] * l[i];
                    s[i] = -s[i];
                    flip[i] = true;
                }
            }
            let g = gcd_i128(s[0], s[1]);
            let v = value - off;
            if v.rem_euclid(g) != 0 {
                return None;
            }
            let (x1, x2) = solve_two_coords(v / g, s[0] / g, s[1] / g, l[0], l[1])?;
            let coords = vec![
                if flip[0] { l[0] - x1 } else { x1 },
                if flip[1] { l[1] - x2 } else { x2 },
            ];
            debug_assert_eq!(
                gap.offset + gap.steps[0] * coords[0] + gap.steps[1] * coords[1],
                value
            );
            Some(coords)
        }
        _ => None,
    }
}
