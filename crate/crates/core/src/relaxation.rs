//! Pauli master equation for level populations driven by detailed-balance
//! rates, and its Gibbs fixed point.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, softplus, Real};

/// Pairwise detailed balance tolerance for generated rates.
pub const BUILT_TOLERANCE: f64 = 1e-12;
/// Pairwise detailed balance tolerance for rates read from a table.
pub const TABLE_TOLERANCE: f64 = 1e-9;
/// Largest `dt · (total exit rate)` accepted by [`evolve`].
pub const STABILITY_LIMIT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    Metropolis,
    HeatBath,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateModel<T> {
    pub kind: RateKind,
    /// Base rate in 1/s.
    pub gamma0: T,
}

impl<T: Real> RateModel<T> {
    pub fn metropolis(gamma0: T) -> Self {
        Self {
            kind: RateKind::Metropolis,
            gamma0,
        }
    }

    pub fn heat_bath(gamma0: T) -> Self {
        Self {
            kind: RateKind::HeatBath,
            gamma0,
        }
    }

    /// `ln(W(n → m)/γ0)` for an energy step `Δ = E_m − E_n` at inverse
    /// temperature `b`.
    fn log_shape(&self, b: T, delta: T) -> T {
        let x = b * delta;
        match self.kind {
            RateKind::Metropolis => (-x).min(T::zero()),
            RateKind::HeatBath => -softplus(x),
        }
    }
}

/// Transition rates between levels; `rate(m, n)` is the rate from `n` to `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSystem<T> {
    energies: Vec<T>,
    beta: T,
    rates: Vec<Vec<T>>,
    log_rates: Vec<Vec<T>>,
    tabulated: bool,
}

pub fn build_rates<T: Real>(energies: &[T], beta: T, model: RateModel<T>) -> Result<RateSystem<T>> {
    check_inputs(energies, beta)?;
    if !(model.gamma0 > T::zero()) || !model.gamma0.is_finite() {
        return Err(Error::Domain(format!(
            "gamma0 must be positive, got {:e}",
            model.gamma0.as_f64()
        )));
    }
    let k = energies.len();
    let log_gamma = model.gamma0.ln();
    let mut rates = vec![vec![T::zero(); k]; k];
    let mut log_rates = vec![vec![T::neg_infinity(); k]; k];
    for m in 0..k {
        for n in (0..k).filter(|&n| n != m) {
            let shape = model.log_shape(beta, energies[m] - energies[n]);
            rates[m][n] = model.gamma0 * shape.exp();
            log_rates[m][n] = log_gamma + shape;
        }
    }
    let system = RateSystem {
        energies: energies.to_vec(),
        beta,
        rates,
        log_rates,
        tabulated: false,
    };
    system.check_detailed_balance(T::lit(BUILT_TOLERANCE))?;
    Ok(system)
}

fn check_inputs<T: Real>(energies: &[T], beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "inverse temperature must be positive, got {:e}",
            beta.as_f64()
        )));
    }
    if energies.len() < 2 {
        return Err(Error::Domain("rate systems need at least two levels".into()));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Domain("level energies must be finite".into()));
    }
    Ok(())
}

impl<T: Real> RateSystem<T> {
    /// Rates given as `(m, n, W(n → m))` triples; missing pairs are zero.
    /// The table must satisfy detailed balance to `tolerance` (relative,
    /// in log space); a zero entry is accepted only where the balancing
    /// rate would underflow.
    pub fn from_table(
        energies: &[T],
        beta: T,
        entries: &[(usize, usize, T)],
        tolerance: T,
    ) -> Result<Self> {
        check_inputs(energies, beta)?;
        let k = energies.len();
        let mut rates = vec![vec![T::zero(); k]; k];
        let mut log_rates = vec![vec![T::neg_infinity(); k]; k];
        for &(m, n, rate) in entries {
            if m >= k || n >= k {
                return Err(Error::Table(format!(
                    "rate ({m}, {n}) refers to a level beyond {}",
                    k - 1
                )));
            }
            if m == n {
                return Err(Error::Table(format!("diagonal rate ({m}, {m}) is not allowed")));
            }
            if !(rate >= T::zero()) || !rate.is_finite() {
                return Err(Error::Table(format!(
                    "rate ({m}, {n}) must be finite and non-negative"
                )));
            }
            rates[m][n] = rate;
            log_rates[m][n] = rate.ln();
        }
        let system = Self {
            energies: energies.to_vec(),
            beta,
            rates,
            log_rates,
            tabulated: true,
        };
        system.check_detailed_balance(tolerance)?;
        Ok(system)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Rate from `n` to `m`.
    pub fn rate(&self, m: usize, n: usize) -> T {
        self.rates[m][n]
    }

    pub fn log_rate(&self, m: usize, n: usize) -> T {
        self.log_rates[m][n]
    }

    pub fn is_tabulated(&self) -> bool {
        self.tabulated
    }

    /// Total rate out of level `n`.
    pub fn exit_rate(&self, n: usize) -> T {
        (0..self.len()).filter(|&m| m != n).map(|m| self.rates[m][n]).sum()
    }

    pub fn max_exit_rate(&self) -> T {
        (0..self.len())
            .map(|n| self.exit_rate(n))
            .fold(T::zero(), T::max)
    }

    /// Relative mismatch `|ln W(n→m) − ln W(m→n) + b(E_m − E_n)|` of one
    /// pair; a zero rate balances only a partner whose required value
    /// underflows.
    fn pair_mismatch(&self, m: usize, n: usize) -> T {
        let floor = T::min_positive_value().ln();
        let up = self.log_rates[m][n];
        let down = self.log_rates[n][m];
        let step = self.beta * (self.energies[m] - self.energies[n]);
        match (up.is_finite(), down.is_finite()) {
            (true, true) => {
                let scale = up.abs().max(down.abs()).max(step.abs()).max(T::one());
                (up - down + step).abs() / scale
            }
            (false, false) => T::zero(),
            (true, false) if up + step < floor => T::zero(),
            (false, true) if down - step < floor => T::zero(),
            _ => T::infinity(),
        }
    }

    /// Largest pairwise detailed-balance mismatch.
    pub fn detailed_balance_violation(&self) -> T {
        let k = self.len();
        (0..k)
            .flat_map(|m| ((m + 1)..k).map(move |n| (m, n)))
            .map(|(m, n)| self.pair_mismatch(m, n))
            .fold(T::zero(), T::max)
    }

    fn check_detailed_balance(&self, tolerance: T) -> Result<()> {
        for m in 0..self.len() {
            for n in (m + 1)..self.len() {
                let mismatch = self.pair_mismatch(m, n);
                if !(mismatch <= tolerance) {
                    return Err(Error::DetailedBalance {
                        m,
                        n,
                        mismatch: mismatch.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `dp/dt` with each pair's net flux added to one level and subtracted
    /// from the other, so the components sum to zero up to rounding.
    pub fn derivative(&self, p: &[T]) -> Vec<T> {
        let k = self.len();
        let mut out = vec![T::zero(); k];
        for m in 0..k {
            for n in (m + 1)..k {
                let flux = p[n] * self.rates[m][n] - p[m] * self.rates[n][m];
                out[m] = out[m] + flux;
                out[n] = out[n] - flux;
            }
        }
        out
    }

    /// Connected components of the graph whose edges are pairs with a
    /// nonzero rate in either direction.
    pub fn components(&self) -> usize {
        let k = self.len();
        let mut label: Vec<Option<usize>> = vec![None; k];
        let mut count = 0;
        for start in 0..k {
            if label[start].is_some() {
                continue;
            }
            label[start] = Some(count);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in 0..k {
                    if label[j].is_none() && (self.rates[i][j] > T::zero() || self.rates[j][i] > T::zero()) {
                        label[j] = Some(count);
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        count
    }
}

/// Parses `(m, n, rate)` rows; a header row and `#` comments are allowed.
pub fn read_rate_table<T: Real, R: Read>(reader: R) -> Result<Vec<(usize, usize, T)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Table(e.to_string()))?;
        if record.len() != 3 {
            return Err(Error::Table(format!(
                "row {}: expected 3 columns (m, n, rate), found {}",
                line + 1,
                record.len()
            )));
        }
        let m = record[0].parse::<usize>();
        let n = record[1].parse::<usize>();
        let rate = record[2].parse::<f64>();
        match (m, n, rate) {
            (Ok(m), Ok(n), Ok(rate)) => out.push((m, n, T::lit(rate))),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Table(format!(
                    "row {}: cannot parse {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationState<T> {
    pub p: Vec<T>,
    /// Elapsed time in seconds.
    pub t: T,
}

impl<T: Real> PopulationState<T> {
    pub fn new(p: Vec<T>, t: T) -> Result<Self> {
        if p.iter().any(|&v| !(v >= T::zero())) {
            return Err(Error::Domain("populations must be non-negative".into()));
        }
        let total: T = p.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::Domain(format!(
                "populations must sum to 1, got {}",
                total.as_f64()
            )));
        }
        Ok(Self { p, t })
    }

    /// All weight on `level`.
    pub fn pure(k: usize, level: usize) -> Self {
        let mut p = vec![T::zero(); k];
        p[level] = T::one();
        Self { p, t: T::zero() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub populations: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<PopulationState<T>> {
        Some(PopulationState {
            p: self.populations.last()?.clone(),
            t: *self.times.last()?,
        })
    }

    /// Every `stride`-th sample plus the final one.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let n = self.len();
        let keep = |i: usize| i.is_multiple_of(stride) || i + 1 == n;
        Self {
            times: (0..n).filter(|&i| keep(i)).map(|i| self.times[i]).collect(),
            populations: (0..n)
                .filter(|&i| keep(i))
                .map(|i| self.populations[i].clone())
                .collect(),
        }
    }
}

/// Fixed-step RK4 from `p0` up to `t_max` (a shorter final step lands on it
/// exactly). Every step is recorded, starting with `p0`.
pub fn evolve<T: Real>(
    system: &RateSystem<T>,
    p0: &PopulationState<T>,
    dt: T,
    t_max: T,
) -> Result<Trajectory<T>> {
    if p0.p.len() != system.len() {
        return Err(Error::Domain(format!(
            "initial state has {} levels, system has {}",
            p0.p.len(),
            system.len()
        )));
    }
    if !(dt > T::zero()) || !(t_max >= T::zero()) {
        return Err(Error::Domain("need dt > 0 and t_max >= 0".into()));
    }
    let ratio = dt * system.max_exit_rate();
    if ratio > T::lit(STABILITY_LIMIT) {
        return Err(Error::Stability {
            ratio: ratio.as_f64(),
            limit: STABILITY_LIMIT,
        });
    }
    let mut traj = Trajectory {
        times: vec![p0.t],
        populations: vec![p0.p.clone()],
    };
    let mut p = p0.p.clone();
    let steps = (t_max / dt).ceil().to_usize().unwrap_or(0);
    let half = T::lit(0.5);
    let axpy = |p: &[T], k: &[T], s: T| -> Vec<T> { p.iter().zip(k).map(|(&a, &b)| a + s * b).collect() };
    for step in 0..steps {
        let t_now = p0.t + dt * T::lit_usize(step);
        let h = dt.min(p0.t + t_max - t_now);
        let k1 = system.derivative(&p);
        let k2 = system.derivative(&axpy(&p, &k1, half * h));
        let k3 = system.derivative(&axpy(&p, &k2, half * h));
        let k4 = system.derivative(&axpy(&p, &k3, h));
        let sixth = h / T::lit(6.0);
        for i in 0..p.len() {
            p[i] = p[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        traj.times.push(if step + 1 == steps { p0.t + t_max } else { t_now + h });
        traj.populations.push(p.clone());
    }
    Ok(traj)
}

/// `p_i ∝ exp(−b E_i)`, normalized in log space.
pub fn gibbs<T: Real>(energies: &[T], beta: T) -> Vec<T> {
    gibbs_log_weights(energies, beta).into_iter().map(T::exp).collect()
}

pub fn gibbs_log_weights<T: Real>(energies: &[T], beta: T) -> Vec<T> {
    let floor = energies.iter().copied().fold(T::infinity(), T::min);
    let raw: Vec<T> = energies.iter().map(|&e| -beta * (e - floor)).collect();
    let total = log_sum_exp(raw.iter().copied());
    raw.into_iter().map(|v| v - total).collect()
}

/// The Gibbs state of `system`, verified to annihilate its generator.
pub fn stationary_distribution<T: Real>(system: &RateSystem<T>) -> Result<PopulationState<T>> {
    let components = system.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let p = gibbs(&system.energies, system.beta);
    let scale = system.max_exit_rate();
    let residual = system
        .derivative(&p)
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if residual > T::lit(1e-10) * scale {
        return Err(Error::Convergence(format!(
            "Gibbs state leaves generator residual {:e} (rate scale {:e})",
            residual.as_f64(),
            scale.as_f64()
        )));
    }
    Ok(PopulationState { p, t: T::zero() })
}

/// `D(p ‖ q) = Σ p ln(p/q)` with `0 ln 0 = 0`.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi == T::zero() {
                T::zero()
            } else if qi == T::zero() {
                T::infinity()
            } else {
                pi * (pi / qi).ln()
            }
        })
        .sum()
}

pub fn kl_to_gibbs<T: Real>(trajectory: &Trajectory<T>, target: &[T]) -> Vec<T> {
    trajectory
        .populations
        .iter()
        .map(|p| kl_divergence(p, target))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_energies_give_symmetric_rates() {
        let s = build_rates(&[0.3, 0.3, 0.3], 2.0, RateModel::metropolis(5.0)).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                if m != n {
                    assert_eq!(s.rate(m, n), 5.0);
                }
            }
        }
        let hb = build_rates(&[0.3_f64, 0.3], 2.0, RateModel::heat_bath(5.0)).unwrap();
        assert!((hb.rate(0, 1) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn metropolis_two_level_ln2() {
        let s = build_rates(&[0.0, 2f64.ln()], 1.0, RateModel::metropolis(1.0)).unwrap();
        assert_eq!(s.rate(0, 1), 1.0);
        assert!((s.rate(1, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn huge_gaps_underflow_cleanly() {
        let b = 4.87e3;
        let e = [2.33811, 4.08795];
        for model in [RateModel::metropolis(1.0), RateModel::heat_bath(1.0)] {
            let s = build_rates(&e, b, model).unwrap();
            assert_eq!(s.rate(1, 0), 0.0);
            assert_eq!(s.rate(0, 1), 1.0);
            assert!(s.log_rate(1, 0) < -8000.0);
            assert_eq!(s.components(), 1);
            let g = stationary_distribution(&s).unwrap();
            assert_eq!(g.p[0], 1.0);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(build_rates(&[0.0, 1.0], 0.0, RateModel::metropolis(1.0)).is_err());
        assert!(build_rates(&[0.0], 1.0, RateModel::metropolis(1.0)).is_err());
        assert!(build_rates(&[0.0, 1.0], 1.0, RateModel::metropolis(-1.0)).is_err());
    }

    #[test]
    fn gibbs_is_stationary() {
        let e = [0.0_f64, 0.4, 1.1, 1.5];
        let s = build_rates(&e, 1.3, RateModel::heat_bath(2.0)).unwrap();
        let g = stationary_distribution(&s).unwrap();
        let traj = evolve(&s, &g, 0.01, 50.0).unwrap();
        for p in &traj.populations {
            for (a, b) in p.iter().zip(&g.p) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_level_relaxation_is_exponential() {
        let (b, de) = (1.0_f64, 0.7);
        let s = build_rates(&[0.0, de], b, RateModel::metropolis(1.0)).unwrap();
        let traj = evolve(&s, &PopulationState::pure(2, 0), 0.01, 10.0).unwrap();
        let up = s.rate(1, 0);
        let down = s.rate(0, 1);
        let eq = (-b * de).exp() / (1.0 + (-b * de).exp());
        for (t, p) in traj.times.iter().zip(&traj.populations) {
            let exact = eq * (1.0 - (-(up + down) * t).exp());
            assert!((p[1] - exact).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn stability_guard() {
        let s = build_rates(&[0.0, 0.0, 0.0], 1.0, RateModel::metropolis(1.0)).unwrap();
        let p0 = PopulationState::pure(3, 0);
        assert!(matches!(evolve(&s, &p0, 0.06, 1.0), Err(Error::Stability { .. })));
        assert!(evolve(&s, &p0, 0.05, 1.0).is_ok());
    }

    #[test]
    fn final_step_lands_on_t_max() {
        let s = build_rates(&[0.0, 1.0], 1.0, RateModel::metropolis(1.0)).unwrap();
        let traj = evolve(&s, &PopulationState::pure(2, 0), 0.03, 1.0).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert_eq!(traj.len(), 35);
        assert_eq!(traj.thinned(10).len(), 5);
        let empty = evolve(&s, &PopulationState::pure(2, 0), 0.03, 0.0).unwrap();
        assert_eq!(empty.len(), 1);
    }

    #[test]
    fn kl_conventions() {
        assert_eq!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5]), 2f64.ln());
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn tables_are_validated() {
        let e = [0.0, 1.0];
        let good = [(1, 0, (-1.0f64).exp()), (0, 1, 1.0)];
        let s = RateSystem::from_table(&e, 1.0, &good, TABLE_TOLERANCE).unwrap();
        assert!(s.is_tabulated());
        let bad = [(1, 0, 0.5), (0, 1, 1.0)];
        assert!(matches!(
            RateSystem::from_table(&e, 1.0, &bad, TABLE_TOLERANCE),
            Err(Error::DetailedBalance { .. })
        ));
        let one_way = [(0, 1, 1.0)];
        assert!(RateSystem::from_table(&e, 1.0, &one_way, TABLE_TOLERANCE).is_err());
        let far = [(0, 1, 1.0)];
        assert!(RateSystem::from_table(&[0.0, 1.0], 1e3, &far, TABLE_TOLERANCE).is_ok());
        assert!(RateSystem::from_table(&e, 1.0, &[(2, 0, 1.0)], TABLE_TOLERANCE).is_err());
    }

    #[test]
    fn disconnected_tables_are_reported() {
        let e = [0.0, 0.0, 0.0, 0.0];
        let rows = [(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)];
        let s = RateSystem::from_table(&e, 1.0, &rows, TABLE_TOLERANCE).unwrap();
        assert!(matches!(
            stationary_distribution(&s),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn rate_table_csv() {
        let text = "m,n,rate\n# comment\n1,0,0.25\n0,1,1.0\n";
        let rows: Vec<(usize, usize, f64)> = read_rate_table(text.as_bytes()).unwrap();
        assert_eq!(rows, vec![(1, 0, 0.25), (0, 1, 1.0)]);
        assert!(read_rate_table::<f64, _>("1,0\n".as_bytes()).is_err());
        assert!(read_rate_table::<f64, _>("1,0,1\nx,y,z\n".as_bytes()).is_err());
    }

    fn levels() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, 2..7)
    }

    proptest! {
        #[test]
        fn built_rates_obey_detailed_balance(e in levels(), b in 0.01f64..50.0, heat in any::<bool>()) {
            let model = if heat { RateModel::heat_bath(1.0) } else { RateModel::metropolis(1.0) };
            let s = build_rates(&e, b, model).unwrap();
            prop_assert!(s.detailed_balance_violation() <= 1e-12);
        }

        #[test]
        fn evolution_conserves_probability_and_kl_decreases(e in levels(), b in 0.1f64..3.0, start in 0usize..2) {
            let s = build_rates(&e, b, RateModel::metropolis(1.0)).unwrap();
            let dt = 0.1 / s.max_exit_rate();
            let traj = evolve(&s, &PopulationState::pure(e.len(), start), dt, 5.0).unwrap();
            let target = gibbs(&e, b);
            let kl = kl_to_gibbs(&traj, &target);
            for w in kl.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            for p in &traj.populations {
                let total: f64 = p.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
