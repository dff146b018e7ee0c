//! Adaptive explicit Runge-Kutta integrator of order 8(5,3) (Dormand-Prince
//! DOP853) for complex-valued linear ODE systems `y' = f(t, y)`.
//!
//! Step-size control follows the Hairer-Wanner combined 5th/3rd-order error
//! estimate. No dense output: callers integrate to each requested time and
//! the last accepted step size is carried over between calls.

use crate::{Complex64, Error, Result};

const N_STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Clone, Copy, Debug)]
pub struct Dop853Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dop853Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

pub struct Dop853<F> {
    rhs: F,
    opts: Dop853Options,
    k: Vec<Vec<Complex64>>,
    y_stage: Vec<Complex64>,
    y_new: Vec<Complex64>,
    h: Option<f64>,
    steps: usize,
    rejected: usize,
}

impl<F> Dop853<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(n: usize, rhs: F, opts: Dop853Options) -> Self {
        Self {
            rhs,
            opts,
            k: vec![vec![Complex64::new(0.0, 0.0); n]; N_STAGES],
            y_stage: vec![Complex64::new(0.0, 0.0); n],
            y_new: vec![Complex64::new(0.0, 0.0); n],
            h: None,
            steps: 0,
            rejected: 0,
        }
    }

    /// Accepted and rejected step counts so far.
    pub fn stats(&self) -> (usize, usize) {
        (self.steps, self.rejected)
    }

    fn scale(&self, a: Complex64, b: Complex64) -> f64 {
        self.opts.atol + self.opts.rtol * a.norm().max(b.norm())
    }

    fn initial_step(&mut self, t: f64, y: &[Complex64], dir: f64) -> f64 {
        let n = y.len();
        let mut f0 = vec![Complex64::new(0.0, 0.0); n];
        (self.rhs)(t, y, &mut f0);
        let (mut d0, mut d1) = (0.0, 0.0);
        for i in 0..n {
            let s = self.scale(y[i], y[i]);
            d0 += (y[i].norm() / s).powi(2);
            d1 += (f0[i].norm() / s).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<Complex64> = (0..n).map(|i| y[i] + f0[i] * (h0 * dir)).collect();
        let mut f1 = vec![Complex64::new(0.0, 0.0); n];
        (self.rhs)(t + h0 * dir, &y1, &mut f1);
        let mut d2 = 0.0;
        for i in 0..n {
            d2 += ((f1[i] - f0[i]).norm() / self.scale(y[i], y[i])).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }

    /// Advances `y` from `t0` to `t1` in place.
    pub fn integrate(&mut self, t0: f64, t1: f64, y: &mut [Complex64]) -> Result<()> {
        if t1 == t0 {
            return Ok(());
        }
        let dir = (t1 - t0).signum();
        let n = y.len();
        let mut t = t0;
        let mut h_abs = match self.h {
            Some(h) => h,
            None => self.initial_step(t0, y, dir),
        };
        (self.rhs)(t, y, &mut self.k[0]);
        while (t1 - t) * dir > 0.0 {
            let min_step = 10.0 * (next_up(t.abs()) - t.abs());
            let remaining = (t1 - t).abs();
            let mut step_rejected = false;
            loop {
                if h_abs < min_step {
                    return Err(Error::StepUnderflow { t, h: h_abs });
                }
                let clamp = h_abs >= remaining;
                let h = if clamp { remaining } else { h_abs } * dir;
                self.stages(t, h, y);
                // error estimate
                let (mut e5, mut e3) = (0.0, 0.0);
                for i in 0..n {
                    let mut s5 = Complex64::new(0.0, 0.0);
                    let mut s3 = Complex64::new(0.0, 0.0);
                    for s in 0..N_STAGES {
                        s5 += self.k[s][i] * E5[s];
                        s3 += self.k[s][i] * E3[s];
                    }
                    let sc = self.scale(y[i], self.y_new[i]);
                    e5 += (s5.norm() / sc).powi(2);
                    e3 += (s3.norm() / sc).powi(2);
                }
                let err = if e5 == 0.0 && e3 == 0.0 {
                    0.0
                } else {
                    h.abs() * e5 / ((e5 + 0.01 * e3) * n as f64).sqrt()
                };
                if err < 1.0 {
                    let mut factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                    };
                    if step_rejected {
                        factor = factor.min(1.0);
                    }
                    if !clamp {
                        h_abs *= factor;
                    } else {
                        h_abs = h_abs.max(remaining * factor);
                    }
                    t = if clamp { t1 } else { t + h };
                    y.copy_from_slice(&self.y_new);
                    (self.rhs)(t, y, &mut self.k[0]);
                    self.steps += 1;
                    if self.steps > self.opts.max_steps {
                        return Err(Error::Numerical("DOP853 step budget exhausted".into()));
                    }
                    break;
                }
                h_abs *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
                step_rejected = true;
                self.rejected += 1;
            }
        }
        self.h = Some(h_abs);
        Ok(())
    }

    /// Fills stages 1..12 (stage 0 holds `f(t, y)`) and the 8th-order update.
    fn stages(&mut self, t: f64, h: f64, y: &[Complex64]) {
        let n = y.len();
        for s in 1..N_STAGES {
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.y_stage[i] = y[i] + acc * h;
            }
            (self.rhs)(t + C[s] * h, &self.y_stage, &mut self.k[s]);
        }
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..N_STAGES {
                acc += self.k[s][i] * B[s];
            }
            self.y_new[i] = y[i] + acc * h;
        }
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

// Butcher tableau (Hairer's DOP853, 12 stages).
const C: [f64; 12] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const E3: [f64; 12] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];
const E5: [f64; 12] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = -i w y  =>  y(t) = exp(-i w t)
        let w = 3.0;
        let mut ode = Dop853::new(
            1,
            |_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(0.0, -w) * y[0],
            Dop853Options::default(),
        );
        let mut y = [Complex64::new(1.0, 0.0)];
        ode.integrate(0.0, 10.0, &mut y).unwrap();
        let exact = Complex64::from_polar(1.0, -w * 10.0);
        assert!((y[0] - exact).norm() < 1e-8);
    }

    #[test]
    fn tableau_consistency() {
        for s in 0..N_STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-12, "stage {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
