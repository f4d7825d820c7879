//! Circuit plans: the mid-measured `W_{H̃^k}` product, the shallow `W̃`
//! with a binary k-register, and the unary-encoded reference `W`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::hamiltonian::{ceil_log2, Hamiltonian};
use crate::statevector::{Preparation, RegisterId, RegisterKind, RegisterLayout};

/// Truncated Taylor weights `β̃_k = (τ‖α‖₁)^k / k!` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoefficients {
    pub tau: f64,
    pub alpha_norm: f64,
    pub order: usize,
    pub beta: Vec<f64>,
    pub beta_norm: f64,
}

impl TaylorCoefficients {
    pub fn new(tau: f64, alpha_norm: f64, order: usize) -> Result<Self> {
        if !(alpha_norm > 0.0) || !alpha_norm.is_finite() {
            return Err(Error::InvalidArgument(format!("‖α‖₁ must be positive, got {alpha_norm}")));
        }
        if !(tau >= 0.0) || !(tau * alpha_norm).is_finite() {
            return Err(Error::InvalidArgument(format!("τ must be finite and nonnegative, got {tau}")));
        }
        let x = tau * alpha_norm;
        let mut beta = Vec::with_capacity(order + 1);
        let mut b = 1.0;
        beta.push(b);
        for k in 1..=order {
            b *= x / k as f64;
            beta.push(b);
        }
        let beta_norm = beta.iter().sum();
        Ok(TaylorCoefficients { tau, alpha_norm, order, beta, beta_norm })
    }

    /// Order `K = 2^κ − 1`.
    pub fn for_kappa(tau: f64, alpha_norm: f64, kappa: usize) -> Result<Self> {
        if kappa == 0 || kappa > 20 {
            return Err(Error::InvalidArgument(format!("κ must be in 1..=20, got {kappa}")));
        }
        Self::new(tau, alpha_norm, (1usize << kappa) - 1)
    }

    /// `τ‖α‖₁`.
    pub fn rescaled_time(&self) -> f64 {
        self.tau * self.alpha_norm
    }

    /// `√(β̃_k/‖β̃‖₁)` at binary index `k`, zero-padded to `2^width`.
    pub fn binary_amplitudes(&self, width: usize) -> Vec<c64> {
        let mut a = vec![c64::new(0.0, 0.0); 1usize << width];
        for (k, b) in self.beta.iter().enumerate() {
            a[k] = c64::new((b / self.beta_norm).sqrt(), 0.0);
        }
        a
    }

    /// `√(β̃_k/‖β̃‖₁)` on the unary pattern `|1^k 0^{K−k}⟩` (qubits `0..k` set).
    pub fn unary_amplitudes(&self) -> Vec<c64> {
        let mut a = vec![c64::new(0.0, 0.0); 1usize << self.order];
        for (k, b) in self.beta.iter().enumerate() {
            a[(1usize << k) - 1] = c64::new((b / self.beta_norm).sqrt(), 0.0);
        }
        a
    }
}

/// Amplitudes prepared on the κ-qubit k-register.
pub fn taylor_prepare_amplitudes(tau: f64, alpha_norm: f64, kappa: usize) -> Result<Vec<c64>> {
    Ok(TaylorCoefficients::for_kappa(tau, alpha_norm, kappa)?.binary_amplitudes(kappa))
}

/// Block sizes `2^0, 2^1, …, 2^{κ−1}`: block `i` holds `2^i` select+measure
/// pairs controlled on k-register qubit `i`.
pub fn power_schedule(kappa: usize) -> Vec<usize> {
    (0..kappa).map(|i| 1usize << i).collect()
}

/// Advisory truncation order `⌈ln(T/ε) / ln ln(T/ε)⌉`, at least 1.
pub fn choose_k(t: f64, epsilon: f64) -> Result<usize> {
    if !(t > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("need T > 0 and ε in (0, 1), got T={t}, ε={epsilon}")));
    }
    let x = t / epsilon;
    if !(x > std::f64::consts::E) {
        return Err(Error::Domain(format!("T/ε = {x} must exceed e")));
    }
    let lx = x.ln();
    Ok(((lx / lx.ln()).ceil() as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircuitFamily {
    /// `W_{H̃^k}`: k post-selected LCU blocks of H̃.
    PowerProduct,
    /// `W̃`: binary k-register, singly-controlled blocks, mid-circuit measurements.
    Shallow,
    /// `W`: unary k-register, K ℓ-registers, deferred measurement.
    Unary,
}

impl CircuitFamily {
    pub fn name(self) -> &'static str {
        match self {
            CircuitFamily::PowerProduct => "w-hk",
            CircuitFamily::Shallow => "wtilde",
            CircuitFamily::Unary => "wunary",
        }
    }
}

/// Which part of each `W_{H̃^{2^i}}` block is controlled by the k-register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlScope {
    /// Only SELECT carries the control; PREPARE/PREPARE† cancel on the |0⟩ branch.
    #[default]
    SelectOnly,
    WholeBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Prepare { register: RegisterId, prep: Arc<Preparation>, control: Option<usize> },
    AdjointPrepare { register: RegisterId, prep: Arc<Preparation>, control: Option<usize> },
    Select { terms: RegisterId, control: Option<usize> },
    /// Mid-circuit measurement; any nonzero outcome aborts the shot.
    MeasureExpectZero { register: RegisterId },
    /// Terminal post-selection on all-zero.
    FinalMeasure { registers: Vec<RegisterId> },
}

impl Instruction {
    pub fn is_measurement(&self) -> bool {
        matches!(self, Instruction::MeasureExpectZero { .. } | Instruction::FinalMeasure { .. })
    }
}

#[derive(Debug, Clone)]
pub struct CircuitPlan {
    pub family: CircuitFamily,
    pub layout: RegisterLayout,
    pub hamiltonian: Arc<Hamiltonian>,
    pub taylor: Option<TaylorCoefficients>,
    pub instructions: Vec<Instruction>,
}

impl CircuitPlan {
    pub fn select_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Select { .. }))
            .count()
    }

    pub fn mid_measurements(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::MeasureExpectZero { .. }))
            .count()
    }

    pub fn qubits(&self) -> usize {
        self.layout.total()
    }

    /// Truncation order `K` for Taylor plans, the power `k` for `W_{H̃^k}`.
    pub fn order(&self) -> usize {
        match &self.taylor {
            Some(t) => t.order,
            None => self.select_count(),
        }
    }

    pub fn kappa(&self) -> Option<usize> {
        match self.family {
            CircuitFamily::Shallow => Some(self.layout.kappa()),
            _ => None,
        }
    }

    /// Human-readable listing, stable for golden tests.
    pub fn dump(&self) -> String {
        self.to_string()
    }

    fn register_name(&self, id: RegisterId) -> String {
        let r = self.layout.get(id);
        let base = match r.kind {
            RegisterKind::System => "system".to_string(),
            RegisterKind::Terms => {
                let ids = self.layout.term_ids();
                if ids.len() == 1 {
                    "terms".to_string()
                } else {
                    let j = ids.iter().position(|&x| x == id).unwrap_or(0);
                    format!("terms#{j}")
                }
            }
            RegisterKind::Coefficients => "coeffs".to_string(),
            RegisterKind::UnaryCoefficients => "unary".to_string(),
        };
        format!("{base}[{}]", r.width)
    }
}

impl fmt::Display for CircuitPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "plan {}", self.family.name())?;
        let regs: Vec<String> = (0..self.layout.registers().len())
            .map(|i| self.register_name(RegisterId(i)))
            .collect();
        writeln!(f, "qubits {} = {}", self.qubits(), regs.join(" + "))?;
        writeln!(f, "selects {} mid-measurements {}", self.select_count(), self.mid_measurements())?;
        let ctrl = |c: &Option<usize>| c.map(|q| format!(" ctrl q{q}")).unwrap_or_default();
        for (i, ins) in self.instructions.iter().enumerate() {
            write!(f, "{i:04} ")?;
            match ins {
                Instruction::Prepare { register, control, .. } => {
                    writeln!(f, "prepare {}{}", self.register_name(*register), ctrl(control))?
                }
                Instruction::AdjointPrepare { register, control, .. } => {
                    writeln!(f, "unprepare {}{}", self.register_name(*register), ctrl(control))?
                }
                Instruction::Select { terms, control } => {
                    writeln!(f, "select {}{}", self.register_name(*terms), ctrl(control))?
                }
                Instruction::MeasureExpectZero { register } => {
                    writeln!(f, "measure-zero {}", self.register_name(*register))?
                }
                Instruction::FinalMeasure { registers } => {
                    let names: Vec<String> = registers.iter().map(|r| self.register_name(*r)).collect();
                    writeln!(f, "final-measure {}", names.join(" "))?
                }
            }
        }
        Ok(())
    }
}

fn term_preparation(h: &Hamiltonian, width: usize) -> Result<Arc<Preparation>> {
    Ok(Arc::new(Preparation::new(h.prepare_amplitudes(width)?)?))
}

/// `W_{H̃^k}`: k repetitions of PREPARE, SELECT, PREPARE†, measure ℓ.
pub fn build_w_hk(h: Arc<Hamiltonian>, k: usize) -> Result<CircuitPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("power k must be at least 1".into()));
    }
    let layout = RegisterLayout::shallow(0, h.select_width(), h.n_qubits())?;
    let prep = term_preparation(&h, layout.l_width())?;
    let terms = RegisterLayout::TERMS;
    let mut instructions = Vec::with_capacity(4 * k);
    for _ in 0..k {
        push_block(&mut instructions, terms, &prep, None, ControlScope::SelectOnly);
    }
    Ok(CircuitPlan { family: CircuitFamily::PowerProduct, layout, hamiltonian: h, taylor: None, instructions })
}

fn push_block(
    out: &mut Vec<Instruction>,
    terms: RegisterId,
    prep: &Arc<Preparation>,
    control: Option<usize>,
    scope: ControlScope,
) {
    let prep_ctrl = match scope {
        ControlScope::SelectOnly => None,
        ControlScope::WholeBlock => control,
    };
    out.push(Instruction::Prepare { register: terms, prep: prep.clone(), control: prep_ctrl });
    out.push(Instruction::Select { terms, control });
    out.push(Instruction::AdjointPrepare { register: terms, prep: prep.clone(), control: prep_ctrl });
    out.push(Instruction::MeasureExpectZero { register: terms });
}

/// `W̃` for `e^{−iHτ}` truncated at `K = 2^κ − 1`.
pub fn build_w_tilde(h: Arc<Hamiltonian>, tau: f64, kappa: usize) -> Result<CircuitPlan> {
    build_w_tilde_scoped(h, tau, kappa, ControlScope::SelectOnly)
}

pub fn build_w_tilde_scoped(h: Arc<Hamiltonian>, tau: f64, kappa: usize, scope: ControlScope) -> Result<CircuitPlan> {
    let taylor = TaylorCoefficients::for_kappa(tau, h.l1_norm(), kappa)?;
    shallow_plan(h, taylor, kappa, scope)
}

/// `W̃` truncated at an arbitrary order `K`: the k-register gets
/// `κ = ⌈log₂(K+1)⌉` qubits and the weights above `K` are zero.
pub fn build_w_tilde_order(h: Arc<Hamiltonian>, tau: f64, order: usize) -> Result<CircuitPlan> {
    if order == 0 {
        return Err(Error::InvalidArgument("truncation order K must be at least 1".into()));
    }
    let kappa = ceil_log2(order + 1);
    if kappa > 20 {
        return Err(Error::InvalidArgument(format!("K = {order} needs κ = {kappa} > 20")));
    }
    let taylor = TaylorCoefficients::new(tau, h.l1_norm(), order)?;
    shallow_plan(h, taylor, kappa, ControlScope::SelectOnly)
}

fn shallow_plan(h: Arc<Hamiltonian>, taylor: TaylorCoefficients, kappa: usize, scope: ControlScope) -> Result<CircuitPlan> {
    let layout = RegisterLayout::shallow(kappa, h.select_width(), h.n_qubits())?;
    let coeffs = layout.coefficients_id().expect("shallow layout with κ ≥ 1 has a k-register");
    let kreg = *layout.get(coeffs);
    let b_tilde = Arc::new(Preparation::new(taylor.binary_amplitudes(kappa))?);
    let prep = term_preparation(&h, layout.l_width())?;
    let terms = RegisterLayout::TERMS;

    let mut instructions = vec![Instruction::Prepare { register: coeffs, prep: b_tilde.clone(), control: None }];
    for (i, reps) in power_schedule(kappa).into_iter().enumerate() {
        for _ in 0..reps {
            push_block(&mut instructions, terms, &prep, Some(kreg.qubit(i)), scope);
        }
    }
    instructions.push(Instruction::AdjointPrepare { register: coeffs, prep: b_tilde, control: None });
    instructions.push(Instruction::FinalMeasure { registers: vec![coeffs] });
    Ok(CircuitPlan { family: CircuitFamily::Shallow, layout, hamiltonian: h, taylor: Some(taylor), instructions })
}

/// Unary-encoded reference `W` with deferred measurement.
pub fn build_w_unary(h: Arc<Hamiltonian>, tau: f64, order: usize) -> Result<CircuitPlan> {
    if order == 0 || order > 20 {
        return Err(Error::InvalidArgument(format!("truncation order K must be in 1..=20, got {order}")));
    }
    let taylor = TaylorCoefficients::new(tau, h.l1_norm(), order)?;
    let layout = RegisterLayout::unary(order, h.select_width(), h.n_qubits())?;
    let unary = layout.coefficients_id().expect("unary layout has a coefficient register");
    let ureg = *layout.get(unary);
    let b_k = Arc::new(Preparation::new(taylor.unary_amplitudes())?);
    let prep = term_preparation(&h, layout.l_width())?;
    let term_ids = layout.term_ids();

    let mut instructions = vec![Instruction::Prepare { register: unary, prep: b_k.clone(), control: None }];
    for &t in &term_ids {
        instructions.push(Instruction::Prepare { register: t, prep: prep.clone(), control: None });
    }
    for (j, &t) in term_ids.iter().enumerate() {
        instructions.push(Instruction::Select { terms: t, control: Some(ureg.qubit(j)) });
    }
    for &t in &term_ids {
        instructions.push(Instruction::AdjointPrepare { register: t, prep: prep.clone(), control: None });
    }
    instructions.push(Instruction::AdjointPrepare { register: unary, prep: b_k, control: None });
    let mut registers = term_ids;
    registers.push(unary);
    instructions.push(Instruction::FinalMeasure { registers });
    Ok(CircuitPlan { family: CircuitFamily::Unary, layout, hamiltonian: h, taylor: Some(taylor), instructions })
}

/// Rewrites a mid-measured plan so every block gets a fresh ℓ-register and all
/// post-selection happens in one terminal measurement.
pub fn defer_measurements(plan: &CircuitPlan) -> Result<CircuitPlan> {
    let blocks = plan.mid_measurements();
    if blocks == 0 {
        return Ok(plan.clone());
    }
    let old = &plan.layout;
    let coeff = old.coefficients_id().map(|id| *old.get(id));
    let layout = RegisterLayout::with_term_copies(old.n(), old.l_width(), blocks, coeff.map(|r| (r.kind, r.width)))?;
    let copies = layout.term_ids();
    let new_coeffs = layout.coefficients_id();
    // control qubits move with the coefficient register
    let shift = |c: Option<usize>| -> Option<usize> {
        match (c, coeff, new_coeffs) {
            (Some(q), Some(r), Some(nid)) if r.qubits().contains(&q) => Some(layout.get(nid).offset + q - r.offset),
            (c, _, _) => c,
        }
    };
    let remap = |id: RegisterId, block: usize| -> RegisterId {
        match old.get(id).kind {
            RegisterKind::Terms => copies[block],
            RegisterKind::Coefficients | RegisterKind::UnaryCoefficients => new_coeffs.expect("coefficient register"),
            RegisterKind::System => RegisterLayout::SYSTEM,
        }
    };
    let mut block = 0;
    let mut instructions = Vec::with_capacity(plan.instructions.len());
    for ins in &plan.instructions {
        let b = block.min(blocks - 1);
        match ins {
            Instruction::Prepare { register, prep, control } => instructions.push(Instruction::Prepare {
                register: remap(*register, b),
                prep: prep.clone(),
                control: shift(*control),
            }),
            Instruction::AdjointPrepare { register, prep, control } => instructions.push(Instruction::AdjointPrepare {
                register: remap(*register, b),
                prep: prep.clone(),
                control: shift(*control),
            }),
            Instruction::Select { terms, control } => {
                instructions.push(Instruction::Select { terms: remap(*terms, b), control: shift(*control) })
            }
            Instruction::MeasureExpectZero { .. } => block += 1,
            Instruction::FinalMeasure { .. } => {}
        }
    }
    let mut registers = copies.clone();
    registers.extend(new_coeffs);
    instructions.push(Instruction::FinalMeasure { registers });
    Ok(CircuitPlan {
        family: plan.family,
        layout,
        hamiltonian: plan.hamiltonian.clone(),
        taylor: plan.taylor.clone(),
        instructions,
    })
}
