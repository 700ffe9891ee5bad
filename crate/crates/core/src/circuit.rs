//! Layered arithmetic circuits and Boolean-function lifting.
//!
//! A layered circuit is a sequence of layers; each layer holds addition
//! gates (arbitrary fan-in) followed by multiplication gates (fan-in two,
//! fed only by the same layer's addition gates). Layer `l + 1` reads the
//! multiplication outputs of layer `l`, so every layer is a degree-two map
//! of its inputs.
//!
//! Text format, one gate per line (`#` starts a comment):
//!
//! ```text
//! inputs 3                 # optional; defaults to the largest x<j> used
//! layer 1 add a1 x1 x2
//! layer 1 add a2 x2 x3 1   # integer literals are constants
//! layer 1 mul m1 a1 a2
//! ```
//!
//! Outputs are the last layer's multiplication gates in natural id order
//! (`m2` before `m10`).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::field::Field;

/// Largest supported truth-table arity.
pub const MAX_BOOL_VARS: usize = 16;

/// Circuit files shipped with the crate.
pub mod bundled {
    /// Two layers, five inputs, one degree-4 output.
    pub const ITER_EX: &str = include_str!("../circuits/iter_ex.circuit");
    /// `x1 * x2`.
    pub const PAIR_PRODUCT: &str = include_str!("../circuits/pair_product.circuit");
    /// `(x1 + x2 + 1)^2`.
    pub const SQUARE_SUM: &str = include_str!("../circuits/square_sum.circuit");

    pub const ALL: [(&str, &str); 3] = [
        ("iter_ex", ITER_EX),
        ("pair_product", PAIR_PRODUCT),
        ("square_sum", SQUARE_SUM),
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("circuit expects {expected} inputs, got {actual}")]
    Arity { expected: usize, actual: usize },
    #[error("layer {0} does not exist")]
    NoSuchLayer(usize),
    #[error("{0} variables exceed the supported maximum of {MAX_BOOL_VARS}")]
    TooManyVariables(usize),
    #[error("truth table length {0} is not a power of two")]
    InvalidTruthTable(usize),
}

/// A structural rule broken by a circuit description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("condition {condition} violated at gate `{gate}`: {detail}")]
pub struct Violation {
    /// 1: mult fan-in two; 2: add fan-in at least one; 3: adds precede
    /// mults within a layer; 4: mult inputs are same-layer add gates;
    /// 5: add inputs come from the previous layer's mults (or `x<j>` in
    /// layer 1). Zero marks malformed descriptions such as duplicate ids.
    pub condition: u8,
    pub gate: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Add,
    Mul,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateDecl {
    pub layer: usize,
    pub kind: GateKind,
    pub id: String,
    pub operands: Vec<String>,
}

/// Unvalidated gate list in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CircuitDescription {
    pub inputs: Option<usize>,
    pub gates: Vec<GateDecl>,
}

impl CircuitDescription {
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let mut desc = CircuitDescription::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse { line, message };
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "inputs" => {
                    let [_, n] = tokens[..] else {
                        return Err(err("expected `inputs <n>`".into()));
                    };
                    let n = n
                        .parse()
                        .map_err(|_| err(format!("bad input count `{n}`")))?;
                    desc.inputs = Some(n);
                }
                "layer" => {
                    if tokens.len() < 4 {
                        return Err(err("expected `layer <l> add|mul <id> <inputs...>`".into()));
                    }
                    let layer: usize = tokens[1]
                        .parse()
                        .ok()
                        .filter(|&l| l >= 1)
                        .ok_or_else(|| err(format!("bad layer number `{}`", tokens[1])))?;
                    let kind = match tokens[2] {
                        "add" => GateKind::Add,
                        "mul" => GateKind::Mul,
                        other => return Err(err(format!("unknown gate kind `{other}`"))),
                    };
                    desc.gates.push(GateDecl {
                        layer,
                        kind,
                        id: tokens[3].to_string(),
                        operands: tokens[4..].iter().map(|s| s.to_string()).collect(),
                    });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(desc)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(n) = self.inputs {
            out.push_str(&format!("inputs {n}\n"));
        }
        for g in &self.gates {
            let kind = match g.kind {
                GateKind::Add => "add",
                GateKind::Mul => "mul",
            };
            out.push_str(&format!("layer {} {} {}", g.layer, kind, g.id));
            for op in &g.operands {
                out.push(' ');
                out.push_str(op);
            }
            out.push('\n');
        }
        out
    }
}

fn input_index(token: &str) -> Option<usize> {
    token
        .strip_prefix('x')
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&j| j >= 1)
}

/// Orders `m2` before `m10`: compare the non-digit prefix, then the
/// trailing number, then the raw string.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(s.len() - digits);
        (head.to_string(), tail.parse::<u64>().ok())
    };
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(&hb).then(na.cmp(&nb)).then(a.cmp(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Operand {
    Wire(usize),
    Const(u64),
}

/// One validated layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitLayer {
    input_arity: usize,
    adds: Vec<Vec<Operand>>,
    muls: Vec<(usize, usize)>,
    mul_ids: Vec<String>,
}

impl CircuitLayer {
    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    /// Number of multiplication gates, `A_l`.
    pub fn outputs(&self) -> usize {
        self.muls.len()
    }

    pub fn output_ids(&self) -> &[String] {
        &self.mul_ids
    }

    fn add_value<F: Field>(&self, field: &F, gate: usize, input: &[F::Elem]) -> F::Elem {
        let mut ops = self.adds[gate].iter().map(|op| match *op {
            Operand::Wire(j) => input[j],
            Operand::Const(c) => field.from_u64(c),
        });
        let first = ops.next().expect("validated add gates have inputs");
        ops.fold(first, |acc, v| field.add(acc, v))
    }

    /// All `A_l` multiplication outputs for one layer input vector.
    pub fn eval<F: Field>(
        &self,
        field: &F,
        input: &[F::Elem],
    ) -> Result<Vec<F::Elem>, CircuitError> {
        if input.len() != self.input_arity {
            return Err(CircuitError::Arity {
                expected: self.input_arity,
                actual: input.len(),
            });
        }
        let sums: Vec<F::Elem> = (0..self.adds.len())
            .map(|g| self.add_value(field, g, input))
            .collect();
        Ok(self
            .muls
            .iter()
            .map(|&(a, b)| field.mul(sums[a], sums[b]))
            .collect())
    }

    fn operand_degree(op: &Operand, input_degrees: &[u32]) -> u32 {
        match *op {
            Operand::Wire(j) => input_degrees[j],
            Operand::Const(_) => 0,
        }
    }

    fn output_degrees(&self, input_degrees: &[u32]) -> Vec<u32> {
        let adds: Vec<u32> = self
            .adds
            .iter()
            .map(|ops| {
                ops.iter()
                    .map(|op| Self::operand_degree(op, input_degrees))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        self.muls.iter().map(|&(a, b)| adds[a] + adds[b]).collect()
    }
}

/// A validated layered arithmetic circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithmeticCircuit {
    inputs: usize,
    layers: Vec<CircuitLayer>,
}

impl ArithmeticCircuit {
    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        Ok(validate_circuit(&CircuitDescription::parse(text)?)?)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs())
    }

    pub fn layers(&self) -> &[CircuitLayer] {
        &self.layers
    }

    /// Layer `l`, one-based.
    pub fn layer(&self, l: usize) -> Result<&CircuitLayer, CircuitError> {
        l.checked_sub(1)
            .and_then(|i| self.layers.get(i))
            .ok_or(CircuitError::NoSuchLayer(l))
    }

    /// Total degree bound of the outputs in the circuit inputs, obtained by
    /// propagating `deg(add) = max`, `deg(mul) = sum`.
    pub fn degree(&self) -> u32 {
        let mut degrees = vec![1u32; self.inputs];
        for layer in &self.layers {
            degrees = layer.output_degrees(&degrees);
        }
        degrees.into_iter().max().unwrap_or(0)
    }

    /// Degree of layer `l`'s outputs in that layer's inputs (at most 2).
    pub fn layer_degree(&self, l: usize) -> Result<u32, CircuitError> {
        let layer = self.layer(l)?;
        let ones = vec![1u32; layer.input_arity];
        Ok(layer.output_degrees(&ones).into_iter().max().unwrap_or(0))
    }
}

/// Checks the five layering conditions and compiles the description.
pub fn validate_circuit(desc: &CircuitDescription) -> Result<ArithmeticCircuit, Violation> {
    let violation = |condition: u8, gate: &str, detail: String| Violation {
        condition,
        gate: gate.to_string(),
        detail,
    };

    let mut by_id: HashMap<&str, &GateDecl> = HashMap::new();
    for g in &desc.gates {
        if input_index(&g.id).is_some() || g.id.parse::<u64>().is_ok() {
            return Err(violation(
                0,
                &g.id,
                "gate id collides with an input or constant name".into(),
            ));
        }
        if by_id.insert(&g.id, g).is_some() {
            return Err(violation(0, &g.id, "duplicate gate id".into()));
        }
    }
    let layer_count = desc.gates.iter().map(|g| g.layer).max().unwrap_or(0);
    if layer_count == 0 {
        return Err(violation(0, "", "circuit has no gates".into()));
    }

    let max_input = desc
        .gates
        .iter()
        .filter(|g| g.layer == 1 && g.kind == GateKind::Add)
        .flat_map(|g| g.operands.iter().filter_map(|o| input_index(o)))
        .max()
        .unwrap_or(0);
    let inputs = desc.inputs.unwrap_or(max_input);

    // Condition 3 ordering and per-gate checks, in declaration order.
    let mut seen_mul = vec![false; layer_count + 1];
    for g in &desc.gates {
        match g.kind {
            GateKind::Add => {
                if seen_mul[g.layer] {
                    return Err(violation(
                        3,
                        &g.id,
                        format!(
                            "addition gate declared after a multiplication gate in layer {}",
                            g.layer
                        ),
                    ));
                }
                if g.operands.is_empty() {
                    return Err(violation(2, &g.id, "addition gate has no inputs".into()));
                }
                for op in &g.operands {
                    if op.parse::<u64>().is_ok() {
                        continue;
                    }
                    if let Some(j) = input_index(op) {
                        if g.layer != 1 {
                            return Err(violation(
                                5,
                                &g.id,
                                format!("circuit input `{op}` used in layer {}", g.layer),
                            ));
                        }
                        if j > inputs {
                            return Err(violation(
                                5,
                                &g.id,
                                format!("input `{op}` exceeds declared arity {inputs}"),
                            ));
                        }
                        continue;
                    }
                    match by_id.get(op.as_str()) {
                        Some(src) if src.kind == GateKind::Mul && src.layer + 1 == g.layer => {}
                        Some(src) => {
                            return Err(violation(5, &g.id, format!("`{op}` is a layer-{} {:?} gate, not a multiplication output of layer {}", src.layer, src.kind, g.layer - 1)));
                        }
                        None => return Err(violation(5, &g.id, format!("unknown input `{op}`"))),
                    }
                }
            }
            GateKind::Mul => {
                seen_mul[g.layer] = true;
                if g.operands.len() != 2 {
                    return Err(violation(
                        1,
                        &g.id,
                        format!("multiplication gate has {} inputs", g.operands.len()),
                    ));
                }
                for op in &g.operands {
                    match by_id.get(op.as_str()) {
                        Some(src) if src.kind == GateKind::Add && src.layer == g.layer => {}
                        _ => {
                            return Err(violation(
                                4,
                                &g.id,
                                format!("`{op}` is not an addition gate of layer {}", g.layer),
                            ));
                        }
                    }
                }
            }
        }
    }

    let mut layers = Vec::with_capacity(layer_count);
    let mut prev_muls: Vec<&str> = Vec::new();
    for l in 1..=layer_count {
        let adds: Vec<&GateDecl> = desc
            .gates
            .iter()
            .filter(|g| g.layer == l && g.kind == GateKind::Add)
            .collect();
        let mut muls: Vec<&GateDecl> = desc
            .gates
            .iter()
            .filter(|g| g.layer == l && g.kind == GateKind::Mul)
            .collect();
        if muls.is_empty() {
            let gate = adds.first().map_or("", |g| g.id.as_str());
            return Err(violation(
                3,
                gate,
                format!("layer {l} has no multiplication gates"),
            ));
        }
        muls.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        let wire_of: HashMap<&str, usize> = if l == 1 {
            HashMap::new()
        } else {
            prev_muls
                .iter()
                .enumerate()
                .map(|(i, id)| (*id, i))
                .collect()
        };
        let add_index: HashMap<&str, usize> = adds
            .iter()
            .enumerate()
            .map(|(i, g)| (g.id.as_str(), i))
            .collect();
        let compiled_adds = adds
            .iter()
            .map(|g| {
                g.operands
                    .iter()
                    .map(|op| {
                        if let Ok(c) = op.parse::<u64>() {
                            Operand::Const(c)
                        } else if let Some(j) = input_index(op) {
                            Operand::Wire(j - 1)
                        } else {
                            Operand::Wire(wire_of[op.as_str()])
                        }
                    })
                    .collect()
            })
            .collect();
        let compiled_muls = muls
            .iter()
            .map(|g| {
                (
                    add_index[g.operands[0].as_str()],
                    add_index[g.operands[1].as_str()],
                )
            })
            .collect();
        layers.push(CircuitLayer {
            input_arity: if l == 1 { inputs } else { prev_muls.len() },
            adds: compiled_adds,
            muls: compiled_muls,
            mul_ids: muls.iter().map(|g| g.id.clone()).collect(),
        });
        prev_muls = muls.iter().map(|g| g.id.as_str()).collect();
    }
    Ok(ArithmeticCircuit { inputs, layers })
}

/// Layer-by-layer evaluation.
pub fn eval_circuit<F: Field>(
    field: &F,
    circuit: &ArithmeticCircuit,
    inputs: &[F::Elem],
) -> Result<Vec<F::Elem>, CircuitError> {
    if inputs.len() != circuit.inputs {
        return Err(CircuitError::Arity {
            expected: circuit.inputs,
            actual: inputs.len(),
        });
    }
    let mut values = inputs.to_vec();
    for layer in &circuit.layers {
        values = layer.eval(field, &values)?;
    }
    Ok(values)
}

/// One multiplication gate of one layer, viewed as a degree-two polynomial
/// of that layer's input vector.
#[derive(Debug, Clone, Copy)]
pub struct LayerView<'c> {
    layer: &'c CircuitLayer,
    gate: usize,
}

impl LayerView<'_> {
    pub fn id(&self) -> &str {
        &self.layer.mul_ids[self.gate]
    }

    pub fn eval<F: Field>(&self, field: &F, input: &[F::Elem]) -> Result<F::Elem, CircuitError> {
        if input.len() != self.layer.input_arity {
            return Err(CircuitError::Arity {
                expected: self.layer.input_arity,
                actual: input.len(),
            });
        }
        let (a, b) = self.layer.muls[self.gate];
        Ok(field.mul(
            self.layer.add_value(field, a, input),
            self.layer.add_value(field, b, input),
        ))
    }
}

/// The `A_l` views of layer `l` (one-based).
pub fn layer_polynomials(
    circuit: &ArithmeticCircuit,
    l: usize,
) -> Result<Vec<LayerView<'_>>, CircuitError> {
    let layer = circuit.layer(l)?;
    Ok((0..layer.outputs())
        .map(|gate| LayerView { layer, gate })
        .collect())
}

/// `sum_{a in S} h_a` over characteristic-2 fields, where
/// `h_a = z_1 ... z_n` with `z_i = x_i` if `a_i = 1` and `z_i = y_i = x_i + 1`
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanPolynomial {
    vars: usize,
    /// Each monomial is the vector `a`, bit `i - 1` holding `a_i`.
    monomials: Vec<u32>,
    constant: bool,
}

impl BooleanPolynomial {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn monomials(&self) -> &[u32] {
        &self.monomials
    }

    pub fn constant(&self) -> bool {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty() && !self.constant
    }

    /// The equivalent `1 + sum_{a in S_0} h_a` form.
    pub fn complement_form(&self) -> BooleanPolynomial {
        let ones: std::collections::HashSet<u32> = self.monomials.iter().copied().collect();
        BooleanPolynomial {
            vars: self.vars,
            monomials: (0..1u32 << self.vars)
                .filter(|a| !ones.contains(a))
                .collect(),
            constant: !self.constant,
        }
    }

    /// Evaluates on field images of the input bits; `y_i` is computed as
    /// `x_i + 1` in the field.
    pub fn eval<F: Field>(&self, field: &F, xs: &[F::Elem]) -> Result<F::Elem, CircuitError> {
        if xs.len() != self.vars {
            return Err(CircuitError::Arity {
                expected: self.vars,
                actual: xs.len(),
            });
        }
        let ys: Vec<F::Elem> = xs.iter().map(|&x| field.add(x, field.one())).collect();
        let mut acc = if self.constant {
            field.one()
        } else {
            field.zero()
        };
        for &a in &self.monomials {
            let mut term = field.one();
            for i in 0..self.vars {
                let z = if a >> i & 1 == 1 { xs[i] } else { ys[i] };
                term = field.mul(term, z);
            }
            acc = field.add(acc, term);
        }
        Ok(acc)
    }
}

impl fmt::Display for BooleanPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        if self.constant {
            terms.push("1".into());
        }
        for &a in &self.monomials {
            let lits: Vec<String> = (0..self.vars)
                .map(|i| format!("{}{}", if a >> i & 1 == 1 { 'x' } else { 'y' }, i + 1))
                .collect();
            terms.push(lits.join("*"));
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Lifts a truth table to a polynomial. Row `r` of the table is the input
/// with `x_i = (r >> (i - 1)) & 1`.
pub fn bool_to_poly(truth_table: &[bool]) -> Result<BooleanPolynomial, CircuitError> {
    let len = truth_table.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(CircuitError::InvalidTruthTable(len));
    }
    let vars = len.trailing_zeros() as usize;
    if vars > MAX_BOOL_VARS {
        return Err(CircuitError::TooManyVariables(vars));
    }
    let monomials = truth_table
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(a, _)| a as u32)
        .collect();
    Ok(BooleanPolynomial {
        vars,
        monomials,
        constant: false,
    })
}
