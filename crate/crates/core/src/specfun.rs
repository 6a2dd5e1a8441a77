//! Riccati-Bessel functions `ĵn(t) = sqrt(πt/2) J_{n+1/2}(t)` and
//! `Ĥn(t) = sqrt(πt/2) H⁽¹⁾_{n+1/2}(t)` with their derivatives.
//!
//! For `n ≫ |t|` the first kind underflows and the Hankel kind overflows in
//! `f64`, while every product that enters a mode symbol stays O(1) or O(n).
//! Values are therefore carried as [`Scaled`] numbers (complex mantissa times
//! a power of two) and exponents are combined before anything is converted
//! back to a plain `Complex64`.
//!
//! `ĵn` comes from Miller's downward recurrence, normalized through the
//! Casoratian `ĵ_{n+1}Ĥ_n - ĵ_nĤ_{n+1} = i` at `n = 0`; `Ĥn` comes from the
//! (stable) upward recurrence seeded with its closed forms.

use num_complex::Complex64;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rescale the recurrence pair once magnitudes pass `2^RESCALE_BITS`.
const RESCALE_BITS: i32 = 600;
/// Wronskian defect above which a table is rejected.
const ACCURACY_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("unsupported argument {0}: expected a positive real or a positive imaginary number")]
    Domain(Complex64),
    #[error("Riccati-Bessel table lost precision: Wronskian defect {defect:e} at n = {n}")]
    Accuracy { n: usize, defect: f64 },
}

/// A complex number stored as `mantissa · 2^exponent`, `max(|re|,|im|)` of the
/// mantissa in `[0.5, 1)` (or exactly zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    mantissa: Complex64,
    exponent: i64,
}

/// `x · 2^e`, split into steps so intermediate powers never overflow.
fn ldexp(x: Complex64, mut e: i64) -> Complex64 {
    let mut out = x;
    while e > 1000 {
        out *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        out *= 2f64.powi(-1000);
        e += 1000;
    }
    out * 2f64.powi(e as i32)
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0,
    };

    pub fn new(value: Complex64, exponent: i64) -> Self {
        let m = value.re.abs().max(value.im.abs());
        if m == 0.0 || !m.is_finite() {
            return Scaled {
                mantissa: value,
                exponent: if m == 0.0 { 0 } else { exponent },
            };
        }
        let shift = m.log2().floor() as i64 + 1;
        let mut mantissa = ldexp(value, -shift);
        let mut exponent = exponent + shift;
        // log2 rounding can leave the mantissa a factor two off
        let mm = mantissa.re.abs().max(mantissa.im.abs());
        if mm >= 1.0 {
            mantissa *= 0.5;
            exponent += 1;
        } else if mm < 0.5 {
            mantissa *= 2.0;
            exponent -= 1;
        }
        Scaled { mantissa, exponent }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    /// Plain value; underflows to zero or overflows to infinity when out of range.
    pub fn value(&self) -> Complex64 {
        ldexp(self.mantissa, self.exponent)
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// `log2 |z|`, `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().log2() + self.exponent as f64
        }
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled::new(self.mantissa * other.mantissa, self.exponent + other.exponent)
    }

    pub fn scale(self, factor: Complex64) -> Scaled {
        Scaled::new(self.mantissa * factor, self.exponent)
    }

    pub fn add(self, other: Scaled) -> Scaled {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let e = self.exponent.max(other.exponent);
        let a = ldexp(self.mantissa, self.exponent - e);
        let b = ldexp(other.mantissa, other.exponent - e);
        Scaled::new(a + b, e)
    }

    pub fn sub(self, other: Scaled) -> Scaled {
        self.add(other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn recip(self) -> Scaled {
        Scaled::new(self.mantissa.inv(), -self.exponent)
    }
}

/// Riccati-Bessel values and derivatives for `n = 0..=n_max` at one argument.
#[derive(Clone, Debug)]
pub struct RiccatiTable {
    n_max: usize,
    argument: Complex64,
    j: Vec<Scaled>,
    j_prime: Vec<Scaled>,
    h: Vec<Scaled>,
    h_prime: Vec<Scaled>,
}

/// The three scalar functions that build the single-layer and double-layer symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledProducts {
    pub n: usize,
    /// `2i ĵn Ĥn`
    pub p_jh: Complex64,
    /// `-2i ĵ'n Ĥ'n`
    pub p_jh_prime: Complex64,
    /// `i (ĵn Ĥ'n + ĵ'n Ĥn)`
    pub p_mixed: Complex64,
}

fn validate_argument(z: Complex64) -> Result<(), SpecfunError> {
    let finite = z.re.is_finite() && z.im.is_finite();
    let real_positive = z.im == 0.0 && z.re > 0.0;
    let imag_positive = z.re == 0.0 && z.im > 0.0;
    if finite && (real_positive || imag_positive) {
        Ok(())
    } else {
        Err(SpecfunError::Domain(z))
    }
}

/// Starting index for Miller's recurrence: past the turning point by a margin
/// that scales with the width of the transition region, `|t|^{1/3}`.
fn miller_start(n_max: usize, t_abs: f64) -> usize {
    let base = n_max.max(t_abs.ceil() as usize);
    base + (12.0 * t_abs.cbrt()).ceil() as usize + 30
}

/// Runs `f_{n-1} = (2n+1)/t · f_n - f_{n+1}` downward from `start`, returning
/// unnormalized scaled values for `0..=keep`.
fn downward_minimal(t: Complex64, start: usize, keep: usize) -> Vec<Scaled> {
    let mut out = vec![Scaled::ZERO; keep + 1];
    let mut upper = Complex64::new(0.0, 0.0); // f_{n+1}
    let mut current = Complex64::new(1.0, 0.0); // f_n
    let mut exponent: i64 = 0;
    let limit = 2f64.powi(RESCALE_BITS);
    let mut n = start;
    loop {
        if n <= keep {
            out[n] = Scaled::new(current, exponent);
        }
        if n == 0 {
            break;
        }
        let lower = current * ((2 * n + 1) as f64) / t - upper;
        upper = current;
        current = lower;
        if current.norm() > limit {
            upper *= 2f64.powi(-RESCALE_BITS);
            current *= 2f64.powi(-RESCALE_BITS);
            exponent += RESCALE_BITS as i64;
        }
        n -= 1;
    }
    out
}

/// Runs `f_{n+1} = (2n+1)/t · f_n - f_{n-1}` upward from `f_0, f_1`.
fn upward(t: Complex64, f0: Complex64, f1: Complex64, last: usize) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(last + 1);
    out.push(Scaled::from_complex(f0));
    if last == 0 {
        return out;
    }
    out.push(Scaled::from_complex(f1));
    let mut lower = f0;
    let mut current = f1;
    let mut exponent: i64 = 0;
    let limit = 2f64.powi(RESCALE_BITS);
    for n in 1..last {
        let next = current * ((2 * n + 1) as f64) / t - lower;
        lower = current;
        current = next;
        if current.norm() > limit {
            lower *= 2f64.powi(-RESCALE_BITS);
            current *= 2f64.powi(-RESCALE_BITS);
            exponent += RESCALE_BITS as i64;
        }
        out.push(Scaled::new(current, exponent));
    }
    out
}

/// `f'_n = f_{n-1} - (n/t) f_n` for `n ≥ 1`.
fn derivatives(t: Complex64, f: &[Scaled], f0_prime: Complex64, n_max: usize) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(Scaled::from_complex(f0_prime));
    for n in 1..=n_max {
        let term = f[n].scale(-(n as f64) / t);
        out.push(f[n - 1].add(term));
    }
    out
}

/// Fills a Riccati-Bessel table for `n = 0..=n_max` at `z`.
pub fn riccati_table(n_max: usize, z: Complex64) -> Result<RiccatiTable, SpecfunError> {
    validate_argument(z)?;
    let t = z;
    let eit = (I * t).exp();
    let h0 = -I * eit;
    let h1 = -eit * (Complex64::new(1.0, 0.0) + I / t);
    let h = upward(t, h0, h1, n_max + 1);

    let start = miller_start(n_max + 1, t.norm());
    let u = downward_minimal(t, start, n_max + 1);
    // normalize with the Casoratian at n = 0: ĵ1 Ĥ0 - ĵ0 Ĥ1 = i
    let cas = u[1].mul(h[0]).sub(u[0].mul(h[1]));
    let norm = Scaled::from_complex(I).mul(cas.recip());
    let j: Vec<Scaled> = u.iter().map(|x| x.mul(norm)).collect();

    let j_prime = derivatives(t, &j, t.cos(), n_max);
    let h_prime = derivatives(t, &h, eit, n_max);

    let table = RiccatiTable {
        n_max,
        argument: z,
        j: j[..=n_max].to_vec(),
        j_prime,
        h: h[..=n_max].to_vec(),
        h_prime,
    };
    let (n, defect) = table.max_wronskian_defect();
    if !(defect <= ACCURACY_LIMIT) {
        return Err(SpecfunError::Accuracy { n, defect });
    }
    Ok(table)
}

impl RiccatiTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn argument(&self) -> Complex64 {
        self.argument
    }

    pub fn j(&self, n: usize) -> Complex64 {
        self.j[n].value()
    }

    pub fn j_prime(&self, n: usize) -> Complex64 {
        self.j_prime[n].value()
    }

    pub fn h(&self, n: usize) -> Complex64 {
        self.h[n].value()
    }

    pub fn h_prime(&self, n: usize) -> Complex64 {
        self.h_prime[n].value()
    }

    pub fn j_scaled(&self, n: usize) -> Scaled {
        self.j[n]
    }

    pub fn j_prime_scaled(&self, n: usize) -> Scaled {
        self.j_prime[n]
    }

    pub fn h_scaled(&self, n: usize) -> Scaled {
        self.h[n]
    }

    pub fn h_prime_scaled(&self, n: usize) -> Scaled {
        self.h_prime[n]
    }

    /// `ĵnĤ'n - ĵ'nĤn`, which should equal `i`.
    pub fn wronskian(&self, n: usize) -> Complex64 {
        self.j[n]
            .mul(self.h_prime[n])
            .sub(self.j_prime[n].mul(self.h[n]))
            .value()
    }

    /// Largest `|W_n - i|` over the table and where it occurs.
    pub fn max_wronskian_defect(&self) -> (usize, f64) {
        (0..=self.n_max)
            .map(|n| (n, (self.wronskian(n) - I).norm()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 || x.1.is_nan() { x } else { acc })
    }

    pub fn products(&self, n: usize) -> ScaledProducts {
        let two_i = Complex64::new(0.0, 2.0);
        let jh = self.j[n].mul(self.h[n]).value();
        let jh_prime = self.j_prime[n].mul(self.h_prime[n]).value();
        let mixed = self.j[n]
            .mul(self.h_prime[n])
            .add(self.j_prime[n].mul(self.h[n]))
            .value();
        ScaledProducts {
            n,
            p_jh: two_i * jh,
            p_jh_prime: -two_i * jh_prime,
            p_mixed: I * mixed,
        }
    }

    /// `diag(ĵ'nĤ'n, ĵnĤn)` at this table's argument: the mode weights of the
    /// dissipative single-layer form when the argument is `i`.
    pub fn norm_weights(&self, n: usize) -> [Complex64; 2] {
        [
            self.j_prime[n].mul(self.h_prime[n]).value(),
            self.j[n].mul(self.h[n]).value(),
        ]
    }
}

/// The three symbol products for one mode at a real positive argument.
pub fn scaled_products(n: usize, t: f64) -> Result<ScaledProducts, SpecfunError> {
    let table = riccati_table(n, Complex64::new(t, 0.0))?;
    Ok(table.products(n))
}
