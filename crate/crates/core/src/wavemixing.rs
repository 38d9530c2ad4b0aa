//! Three- and four-wave-mixing signals from nonequilibrium initial states.
//!
//! Second- and third-order analogues of the linear machinery in
//! [`crate::response`]. The matter correlation functions are expanded over
//! system eigenstates with free resolvents `G_kl(nu) = 1/(nu - omega_kl +
//! i eta)`, and the initial density matrix enters pair by pair: every
//! populated element `rho_ab` contributes its own tower of resonances,
//! displaced by the pair's Bohr frequency `omega_ab` through the collapsed
//! frequency integral. Mixing signals combine continuous-wave modes with a
//! spectrally broad Gaussian probe on a detection grid; the earliest
//! interaction always enters through a one-sided spectrum, which is what
//! makes the signals sensitive to how the initial state was prepared.
//!
//! Two independent evaluators cover four-wave mixing: a hard-coded list of
//! resonant pathway terms for the three-level topology (auditable term by
//! term), and a rotating-wave superoperator evaluation built from the
//! Liouville-space matrices in [`crate::liouville`]. Their agreement is part
//! of the test suite.
//!
//! As everywhere in the crate, overall `1/2pi` measures from collapsed
//! frequency integrals are absorbed into the arbitrary units of the traces.

use nalgebra::DVector;

use crate::fields::{CwField, ModeSign};
use crate::liouville::{commutator, free_resolvent, left_multiply, trace_row};
use crate::response::{check_dims, check_eta, Component, Preparation, SignalTrace};
use crate::system::{DensityMatrix, LevelSystem, LiouvilleIndex};
use crate::{C64, Error, Result};

/// Spectrally broad Gaussian detection envelope centered at `center` with
/// width `sigma` (both eV): `sqrt(2 pi / sigma) exp(-(omega-center)^2 /
/// (2 sigma^2))`. Real and positive, so conjugation in heterodyne
/// detection is a no-op.
#[derive(Debug, Clone, Copy)]
pub struct GaussianProbe {
    center: f64,
    sigma: f64,
}

impl GaussianProbe {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !center.is_finite() || !sigma.is_finite() {
            return Err(Error::validation("probe parameters must be finite"));
        }
        if sigma <= 0.0 {
            return Err(Error::validation("probe width must be positive"));
        }
        Ok(Self { center, sigma })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Spectral amplitude at `omega`.
    pub fn amplitude(&self, omega: f64) -> f64 {
        let x = (omega - self.center) / self.sigma;
        (2.0 * std::f64::consts::PI / self.sigma).sqrt() * (-0.5 * x * x).exp()
    }
}

/// Detuning of the detected frequency from the phase-matching combination:
/// `omega - omega1 + omega2 - omega3`.
pub fn detuning(omega: f64, omega1: f64, omega2: f64, omega3: f64) -> f64 {
    omega - omega1 + omega2 - omega3
}

/// Frequency at which the collapsed integral pins the earliest interaction
/// for an initial pair with Bohr frequency `bohr_ab`: the remaining field
/// argument `omega - omega1 - omega2 - bohr_ab` of the third-order
/// correlation evaluated at `(omega, omega - omega1, omega - omega1 -
/// omega2)`.
pub fn collapsed_third_frequency(omega: f64, omega1: f64, omega2: f64, bohr_ab: f64) -> f64 {
    omega - omega1 - omega2 - bohr_ab
}

/// Two-interaction matter correlation on the single Liouville element
/// `|ab>>`, without the `rho_ab` weight:
///
/// `sum_cd [ mu_dc mu_ca G_cb(omega - omega1) (mu_bd G_db(omega) - mu_db
/// G_cd(omega)) + mu_da mu_cb G_ac(omega - omega1) (mu_dc G_ad(omega) -
/// mu_cd G_dc(omega)) ]`
///
/// with `mu` the full (raising plus lowering) dipole matrix. The index
/// placement on the dipole factors is kept as written above; for complex
/// dipole phases it coincides with the hermitian matrix elements of the
/// direct superoperator evaluation only up to conjugate placement, exactly
/// as in [`crate::response::pair_correlation`].
pub fn pair_correlation_quadratic(
    system: &LevelSystem,
    a: usize,
    b: usize,
    omega: f64,
    omega1: f64,
    eta: f64,
) -> C64 {
    let mu = system.dipole_full();
    let n = system.len();
    let g = |nu: f64, k: usize, l: usize| {
        C64::new(1.0, 0.0) / C64::new(nu - system.bohr_frequency(k, l), eta)
    };
    let mut sum = C64::new(0.0, 0.0);
    for c in 0..n {
        for d in 0..n {
            let first = mu[(d, c)] * mu[(c, a)];
            if first.norm_sqr() > 0.0 {
                sum += first
                    * g(omega - omega1, c, b)
                    * (mu[(b, d)] * g(omega, d, b) - mu[(d, b)] * g(omega, c, d));
            }
            let second = mu[(d, a)] * mu[(c, b)];
            if second.norm_sqr() > 0.0 {
                sum += second
                    * g(omega - omega1, a, c)
                    * (mu[(d, c)] * g(omega, a, d) - mu[(c, d)] * g(omega, d, c));
            }
        }
    }
    sum
}

/// Two-interaction correlation weighted by the initial state:
/// `sum_ab rho_ab` times [`pair_correlation_quadratic`].
pub fn matter_correlation_quadratic(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    omega: f64,
    omega1: f64,
    eta: f64,
) -> Result<C64> {
    check_eta(eta)?;
    check_dims(system, rho0)?;
    let n = system.len();
    let mut sum = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let w = rho0.element(a, b);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            sum += w * pair_correlation_quadratic(system, a, b, omega, omega1, eta);
        }
    }
    Ok(sum)
}

/// Three-interaction matter correlation on `|ab>>`, without the `rho_ab`
/// weight: the four-family eigenstate expansion evaluated at the argument
/// chain `(omega, omega - omega1, omega - omega1 - omega2)`,
///
/// `sum_cde [ mu_ca mu_dc mu_be mu_ed G_cb'' G_db' (G_eb - G_de)
///          - mu_ca mu_bd mu_ec mu_de G_ad'' G_cd' (G_ed - G_ce)
///          - mu_ec mu_de mu_bd mu_ac G_cb'' G_cd' (G_ed - G_ce)
///          - mu_ea mu_de mu_cd mu_bc G_ac'' G_ad' (G_ae - G_ed) ]`
///
/// where unprimed resolvents take `omega`, primed `omega - omega1`, and
/// double-primed `omega - omega1 - omega2`. The relative family signs
/// follow from expanding the nested dipole commutators of the defining
/// correlation branch by branch (the second-to-fourth families collect the
/// chains that act on the bra side an odd number of times); a test checks
/// the sum against a direct superoperator evaluation at machine precision,
/// which is what fixes the signs.
pub fn pair_correlation_cubic(
    system: &LevelSystem,
    a: usize,
    b: usize,
    omega: f64,
    omega1: f64,
    omega2: f64,
    eta: f64,
) -> C64 {
    let mu = system.dipole_full();
    let n = system.len();
    let g = |nu: f64, k: usize, l: usize| {
        C64::new(1.0, 0.0) / C64::new(nu - system.bohr_frequency(k, l), eta)
    };
    let w0 = omega;
    let w1 = omega - omega1;
    let w2 = omega - omega1 - omega2;
    let mut sum = C64::new(0.0, 0.0);
    for c in 0..n {
        for d in 0..n {
            for e in 0..n {
                let f1 = mu[(c, a)] * mu[(d, c)] * mu[(b, e)] * mu[(e, d)];
                if f1.norm_sqr() > 0.0 {
                    sum += f1 * g(w2, c, b) * g(w1, d, b) * (g(w0, e, b) - g(w0, d, e));
                }
                let f2 = mu[(c, a)] * mu[(b, d)] * mu[(e, c)] * mu[(d, e)];
                if f2.norm_sqr() > 0.0 {
                    sum -= f2 * g(w2, a, d) * g(w1, c, d) * (g(w0, e, d) - g(w0, c, e));
                }
                let f3 = mu[(e, c)] * mu[(d, e)] * mu[(b, d)] * mu[(a, c)];
                if f3.norm_sqr() > 0.0 {
                    sum -= f3 * g(w2, c, b) * g(w1, c, d) * (g(w0, e, d) - g(w0, c, e));
                }
                let f4 = mu[(e, a)] * mu[(d, e)] * mu[(c, d)] * mu[(b, c)];
                if f4.norm_sqr() > 0.0 {
                    sum -= f4 * g(w2, a, c) * g(w1, a, d) * (g(w0, a, e) - g(w0, e, d));
                }
            }
        }
    }
    sum
}

/// Three-interaction correlation weighted by the initial state:
/// `sum_ab rho_ab` times [`pair_correlation_cubic`]. The collapsed
/// frequency constraint fixing the earliest field argument per pair is
/// exposed through [`collapsed_third_frequency`].
pub fn chi3_generalized(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    omega: f64,
    omega1: f64,
    omega2: f64,
    eta: f64,
) -> Result<C64> {
    check_eta(eta)?;
    check_dims(system, rho0)?;
    let n = system.len();
    let mut sum = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let w = rho0.element(a, b);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            sum += w * pair_correlation_cubic(system, a, b, omega, omega1, omega2, eta);
        }
    }
    Ok(sum)
}

/// Three-wave-mixing detection spectrum for two continuous-wave modes read
/// out by a broad probe.
///
/// The collapsed form of the second-order signal: for every initial pair
/// the later interaction takes one mode's signed component directly while
/// the earliest enters through the one-sided spectrum of the other mode,
/// evaluated at `omega - nu_p - omega_ab`. Both orderings of the two
/// distinct modes are summed (one interaction with each mode; same-mode
/// pairings belong to other phase-matching directions), keeping the signal
/// linear in each mode amplitude:
///
/// `S(omega) = 2 probe(omega) Im sum_(p != q) sum_ab E_p rho_ab
/// C2_ab(omega, omega - nu_p) Ebar_q(omega - nu_p - omega_ab)`
pub fn twm_signal(
    system: &LevelSystem,
    rho0: &DensityMatrix,
    modes: &[CwField; 2],
    probe: &GaussianProbe,
    grid: &[f64],
    eta: f64,
) -> Result<SignalTrace> {
    check_eta(eta)?;
    check_dims(system, rho0)?;
    let n = system.len();
    let mut values = Vec::with_capacity(grid.len());
    for &omega in grid {
        let mut acc = C64::new(0.0, 0.0);
        for (p, q) in [(0, 1), (1, 0)] {
            let (amp_p, nu_p) = modes[p].signed_component();
            for a in 0..n {
                for b in 0..n {
                    let w = rho0.element(a, b);
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let corr = pair_correlation_quadratic(system, a, b, omega, nu_p, eta);
                    let tail =
                        modes[q].one_sided_spectrum(omega - nu_p - system.bohr_frequency(a, b), eta);
                    acc += amp_p * w * corr * tail;
                }
            }
        }
        values.push(2.0 * probe.amplitude(omega) * acc.im);
    }
    SignalTrace::new(grid.to_vec(), values, Component::Total, eta, "twm")
}

/// The four resonant pathway families of the three-level four-wave-mixing
/// signal, named in the fixed order of the hard-coded term list.
///
/// All families share the leading pair denominator `(Delta - omega_ij +
/// i eta)` with `Delta = omega - omega1 + omega2 - omega3`, and differ in
/// the chain of three interaction denominators; `i, j, k` run over the two
/// lower states and `c` is the shared upper state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathwayFamily {
    /// Upper coherence `(c,j)` at the detected frequency, lower-pair
    /// interval `(k,j)` displaced by `omega3`, upper coherence `(c,j)`
    /// displaced by `omega2 - omega3`.
    A1,
    /// Upper coherence `(c,k)` at the detected frequency, a bare
    /// `omega - omega3` interval, upper coherence `(c,j)` displaced by
    /// `omega2 - omega3`.
    A2,
    /// Upper coherence `(c,k)` at the detected frequency, lower-pair
    /// interval `(i,k)` displaced by `omega1`, and the interval where
    /// `omega1 + omega3` balances the `(i,c)` coherence.
    A3,
    /// Upper coherence `(c,k)` at the detected frequency, a bare
    /// `omega - omega3` interval, and the `(i,c)` balance interval of A3.
    A4,
}

impl PathwayFamily {
    pub const ALL: [PathwayFamily; 4] = [
        PathwayFamily::A1,
        PathwayFamily::A2,
        PathwayFamily::A3,
        PathwayFamily::A4,
    ];

    fn slot(self) -> usize {
        match self {
            PathwayFamily::A1 => 0,
            PathwayFamily::A2 => 1,
            PathwayFamily::A3 => 2,
            PathwayFamily::A4 => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PathwayFamily::A1 => "a1",
            PathwayFamily::A2 => "a2",
            PathwayFamily::A3 => "a3",
            PathwayFamily::A4 => "a4",
        }
    }
}

/// One term of the four-wave-mixing pathway sum: family, lower-state
/// indices `(i, j, k)`, whether the `omega1 <-> omega3` exchange has been
/// applied, the initial-pair weight `rho_ij`, and the ordered dipole
/// factors and complex denominators (leading pair denominator first).
#[derive(Debug, Clone, Copy)]
pub struct PathwayTerm {
    pub family: PathwayFamily,
    pub exchanged: bool,
    pub indices: (usize, usize, usize),
    pub weight: C64,
    pub dipoles: [C64; 4],
    pub denominators: [C64; 4],
}

impl PathwayTerm {
    /// `weight * prod(dipoles) / prod(denominators)`.
    pub fn value(&self) -> C64 {
        let num: C64 = self.dipoles.iter().product();
        let den: C64 = self.denominators.iter().product();
        self.weight * num / den
    }
}

/// A four-wave-mixing configuration: three continuous-wave modes in the
/// `(+, -, +)` phase-matching pattern, a broad Gaussian probe, and the
/// three-level system with both lower states coupled only to the shared
/// upper state.
#[derive(Debug, Clone)]
pub struct FwmScenario {
    system: LevelSystem,
    rho0: DensityMatrix,
    modes: [CwField; 3],
    probe: GaussianProbe,
    eta: f64,
}

impl FwmScenario {
    pub fn new(
        system: LevelSystem,
        rho0: DensityMatrix,
        modes: [CwField; 3],
        probe: GaussianProbe,
        eta: f64,
    ) -> Result<Self> {
        check_eta(eta)?;
        check_dims(&system, &rho0)?;
        if system.len() != 3 {
            return Err(Error::validation(
                "pathway evaluation needs exactly three levels",
            ));
        }
        if system.dipole_lowering()[(0, 1)].norm_sqr() > 0.0 {
            return Err(Error::validation(
                "pathway evaluation needs the lower pair dipole-forbidden",
            ));
        }
        let signs = [ModeSign::Plus, ModeSign::Minus, ModeSign::Plus];
        for (k, (mode, want)) in modes.iter().zip(signs).enumerate() {
            if mode.sign() != want {
                return Err(Error::validation(format!(
                    "mode {k} must enter with sign {want:?} for the (+,-,+) pattern"
                )));
            }
        }
        Ok(Self {
            system,
            rho0,
            modes,
            probe,
            eta,
        })
    }

    pub fn system(&self) -> &LevelSystem {
        &self.system
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn modes(&self) -> &[CwField; 3] {
        &self.modes
    }

    pub fn probe(&self) -> &GaussianProbe {
        &self.probe
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Detuning of `omega` from this scenario's phase-matching combination.
    pub fn detuning(&self, omega: f64) -> f64 {
        detuning(
            omega,
            self.modes[0].frequency(),
            self.modes[1].frequency(),
            self.modes[2].frequency(),
        )
    }

    /// Product of the three signed mode amplitudes `E1 E2* E3`.
    fn amplitude_product(&self) -> C64 {
        self.modes
            .iter()
            .map(|m| m.signed_component().0)
            .product()
    }
}

/// Four-wave-mixing detection traces: the total signal, its split into
/// initial-population and initial-coherence contributions, and the four
/// per-family traces.
#[derive(Debug, Clone)]
pub struct FwmSignal {
    pub total: SignalTrace,
    pub population: SignalTrace,
    pub coherence: SignalTrace,
    pub families: [SignalTrace; 4],
}

impl FwmSignal {
    pub fn family(&self, f: PathwayFamily) -> &SignalTrace {
        &self.families[f.slot()]
    }
}

/// The full pathway term list at one detected frequency: four families,
/// lower-state indices `i, j, k`, and both halves of the `omega1 <->
/// omega3` exchange, with every dipole factor and denominator spelled out.
/// Terms with zero initial-pair weight are included so the list always has
/// the same shape (64 terms).
///
/// The term list enumerates the rotating-wave interaction branches of the
/// `(+,-,+)` pattern: the two orders that interleave the negative
/// component between the positive ones produce families A1 and A2, the two
/// that lead with it produce A3 and A4, and orders with adjacent positive
/// components vanish (no two-photon ladder in this topology). A test pins
/// the list against the independent superoperator evaluation in
/// [`fwm_signal_rwa`].
pub fn pathway_terms(scenario: &FwmScenario, omega: f64) -> Vec<PathwayTerm> {
    let sys = &scenario.system;
    let mu = sys.dipole_lowering();
    let eta = scenario.eta;
    let up = 2;
    // Lowering element between lower state x and the upper state, and its
    // conjugate for the raising direction.
    let low = |x: usize| mu[(x, up)];
    let f1 = scenario.modes[0].frequency();
    let f2 = scenario.modes[1].frequency();
    let f3 = scenario.modes[2].frequency();
    let delta = detuning(omega, f1, f2, f3);
    let mut out = Vec::with_capacity(64);
    for i in 0..2 {
        for j in 0..2 {
            let weight = scenario.rho0.element(i, j);
            let lead = C64::new(delta - sys.bohr_frequency(i, j), eta);
            for k in 0..2 {
                for (exchanged, w1, w3) in [(false, f1, f3), (true, f3, f1)] {
                    let d = |nu: f64| C64::new(nu, eta);
                    for family in PathwayFamily::ALL {
                        let (dipoles, rest) = match family {
                            PathwayFamily::A1 => (
                                [low(j), low(k).conj(), low(k), low(i).conj()],
                                [
                                    d(omega - sys.bohr_frequency(up, j)),
                                    d(omega - w3 - sys.bohr_frequency(k, j)),
                                    d(omega + f2 - w3 - sys.bohr_frequency(up, j)),
                                ],
                            ),
                            PathwayFamily::A2 => (
                                [low(k), low(j).conj(), low(k).conj(), low(i).conj()],
                                [
                                    d(omega - sys.bohr_frequency(up, k)),
                                    d(omega - w3),
                                    d(omega + f2 - w3 - sys.bohr_frequency(up, j)),
                                ],
                            ),
                            PathwayFamily::A3 => (
                                [low(k), low(j).conj(), low(k).conj(), low(i).conj()],
                                [
                                    d(omega - sys.bohr_frequency(up, k)),
                                    d(omega - w1 - sys.bohr_frequency(i, k)),
                                    d(omega - w1 - w3 - sys.bohr_frequency(i, up)),
                                ],
                            ),
                            PathwayFamily::A4 => (
                                [low(k), low(j).conj(), low(k).conj(), low(i).conj()],
                                [
                                    d(omega - sys.bohr_frequency(up, k)),
                                    d(omega - w3),
                                    d(omega - w1 - w3 - sys.bohr_frequency(i, up)),
                                ],
                            ),
                        };
                        out.push(PathwayTerm {
                            family,
                            exchanged,
                            indices: (i, j, k),
                            weight,
                            dipoles,
                            denominators: [lead, rest[0], rest[1], rest[2]],
                        });
                    }
                }
            }
        }
    }
    out
}

/// Four-wave-mixing signal from the hard-coded pathway term list, with the
/// preparation choosing how the earliest interaction's collapsed frequency
/// enters: [`Preparation::AtPulseCenter`] keeps the one-sided pair
/// Lorentzian `1/(Delta - omega_ij + i eta)` as written in the term list,
/// while [`Preparation::DistantPast`] replaces it by the full-transform
/// limit, a pure spectral density `2 eta / ((Delta - omega_ij)^2 + eta^2)`
/// that changes line shapes and magnitudes but not the resonance
/// positions.
pub fn chi3_pathway_fwm_prepared(
    scenario: &FwmScenario,
    grid: &[f64],
    prep: Preparation,
) -> Result<FwmSignal> {
    let eta = scenario.eta;
    let fields = scenario.amplitude_product();
    let m = grid.len();
    let mut total = vec![0.0; m];
    let mut population = vec![0.0; m];
    let mut coherence = vec![0.0; m];
    let mut families = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for (gi, &omega) in grid.iter().enumerate() {
        let probe = scenario.probe.amplitude(omega);
        for term in pathway_terms(scenario, omega) {
            let lead = term.denominators[0];
            let leading_factor = match prep {
                Preparation::AtPulseCenter => C64::new(1.0, 0.0) / lead,
                // Im -> Re bookkeeping keeps the 1/i that turns the
                // one-sided Lorentzian into its spectral density.
                Preparation::DistantPast => {
                    C64::new(0.0, -2.0 * eta) / C64::new(lead.re * lead.re + eta * eta, 0.0)
                }
            };
            let num: C64 = term.dipoles.iter().product();
            let chain: C64 = term.denominators[1..].iter().product();
            let v = term.weight * num / chain * leading_factor;
            let contrib = 2.0 * (probe * fields * v).re;
            total[gi] += contrib;
            if term.indices.0 == term.indices.1 {
                population[gi] += contrib;
            } else {
                coherence[gi] += contrib;
            }
            families[term.family.slot()][gi] += contrib;
        }
    }
    let [fa1, fa2, fa3, fa4] = families;
    Ok(FwmSignal {
        total: SignalTrace::new(grid.to_vec(), total, Component::Total, eta, "fwm")?,
        population: SignalTrace::new(grid.to_vec(), population, Component::Population, eta, "fwm")?,
        coherence: SignalTrace::new(grid.to_vec(), coherence, Component::Coherence, eta, "fwm")?,
        families: [
            SignalTrace::new(grid.to_vec(), fa1, Component::Total, eta, "fwm-a1")?,
            SignalTrace::new(grid.to_vec(), fa2, Component::Total, eta, "fwm-a2")?,
            SignalTrace::new(grid.to_vec(), fa3, Component::Total, eta, "fwm-a3")?,
            SignalTrace::new(grid.to_vec(), fa4, Component::Total, eta, "fwm-a4")?,
        ],
    })
}

/// Four-wave-mixing signal from the pathway term list with the sudden
/// (one-sided) preparation; see [`chi3_pathway_fwm_prepared`].
pub fn chi3_pathway_fwm(scenario: &FwmScenario, grid: &[f64]) -> Result<FwmSignal> {
    chi3_pathway_fwm_prepared(scenario, grid, Preparation::AtPulseCenter)
}

/// Four-wave-mixing signal by rotating-wave superoperator evaluation, the
/// cross-representation counterpart of [`chi3_pathway_fwm`].
///
/// The three phase-matched signed components are distributed over the
/// three interaction slots in all six orders. Each positive component acts
/// through the commutator with the raising dipole matrix, the negative
/// component through the commutator with the lowering matrix, and
/// detection through the lowering matrix under the trace, so only
/// co-rotating terms survive. Per initial pair the earliest interaction
/// carries the collapsed one-sided Lorentzian `1/(Delta - omega_ij +
/// i eta)`; the resolvent chain then runs at `omega - nu_last - nu_mid`,
/// `omega - nu_last`, and `omega`.
pub fn fwm_signal_rwa(scenario: &FwmScenario, grid: &[f64]) -> Result<SignalTrace> {
    let sys = &scenario.system;
    let eta = scenario.eta;
    let n = sys.len();
    let index = LiouvilleIndex::new(n);
    let lowering = sys.dipole_lowering().clone();
    let raising = sys.dipole_raising();
    let act = [commutator(&raising, &index), commutator(&lowering, &index)];
    let detect = left_multiply(&lowering, &index);
    let tr = trace_row(&index);
    let comps: Vec<(C64, f64, usize)> = scenario
        .modes
        .iter()
        .map(|mode| {
            let (amp, nu) = mode.signed_component();
            let which = match mode.sign() {
                ModeSign::Plus => 0,
                ModeSign::Minus => 1,
            };
            (amp, nu, which)
        })
        .collect();
    let orderings = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let fields = scenario.amplitude_product();
    let mut values = Vec::with_capacity(grid.len());
    for &omega in grid {
        let delta = scenario.detuning(omega);
        let mut v0 = DVector::zeros(index.dim());
        for i in 0..n {
            for j in 0..n {
                let w = scenario.rho0.element(i, j);
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                v0[index.index(i, j)] = w / C64::new(delta - sys.bohr_frequency(i, j), eta);
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for perm in orderings {
            let (_, _, first) = comps[perm[0]];
            let (_, nu_mid, mid) = comps[perm[1]];
            let (_, nu_last, last) = comps[perm[2]];
            let mut v = &act[first] * &v0;
            v = free_resolvent(sys, &index, omega - nu_last - nu_mid, eta) * v;
            v = &act[mid] * v;
            v = free_resolvent(sys, &index, omega - nu_last, eta) * v;
            v = &act[last] * v;
            v = free_resolvent(sys, &index, omega, eta) * v;
            let w = &detect * v;
            acc += tr.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<C64>();
        }
        values.push(2.0 * (scenario.probe.amplitude(omega) * fields * acc).re);
    }
    SignalTrace::new(grid.to_vec(), values, Component::Total, eta, "fwm-rwa")
}
