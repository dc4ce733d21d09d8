//! Model families, parameter layout and the canonical flattening order.
//!
//! Every parameter vector is laid out as
//!
//! 1. the visible fields `a_i` (`i` ascending),
//! 2. for each hidden Pauli channel `P` in canonical order (X < Y < Z), the hidden fields `b_j^P`,
//! 3. for each channel `P`, the interaction weights `w_{i,j}^{Z,P}` row-major (`i` outer, `j` inner),
//! 4. for the fully connected family only: the visible laterals `θ_{i,j}^{Z,Z}` (`i < j`),
//!    then the hidden laterals `θ_{i,j}^{P,Q}` for each `(P, Q)` pair in lexicographic order.
//!
//! All flat vectors exchanged with the optimizer and the finite-difference checker use this order.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Largest visible count the closed-form evaluators will enumerate.
pub const MAX_ENUMERATED_VISIBLE: usize = 24;

/// Largest `n + m` the dense oracle accepts.
pub const MAX_ORACLE_QUBITS: usize = 14;

/// Single-qubit Pauli operator labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Slot in an `[X, Y, Z]` array; `None` for the identity.
    pub const fn xyz_index(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Nonempty subset of `{X, Y, Z}`, always iterated in canonical order X < Y < Z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorSet {
    mask: u8,
}

impl OperatorSet {
    pub const Z: Self = Self { mask: 0b100 };
    pub const XZ: Self = Self { mask: 0b101 };
    pub const YZ: Self = Self { mask: 0b110 };
    pub const XYZ: Self = Self { mask: 0b111 };

    /// Builds a set from labels in any order. Rejects the identity, duplicates and the empty set.
    pub fn new(ops: &[Pauli]) -> Result<Self> {
        let mut mask = 0u8;
        for &op in ops {
            let bit = match op.xyz_index() {
                Some(idx) => 1u8 << idx,
                None => {
                    return Err(Error::InvalidOperatorSet(
                        "identity is not a hidden operator".to_string(),
                    ))
                }
            };
            if mask & bit != 0 {
                return Err(Error::InvalidOperatorSet(format!(
                    "duplicate operator {op}"
                )));
            }
            mask |= bit;
        }
        if mask == 0 {
            return Err(Error::InvalidOperatorSet("empty operator set".to_string()));
        }
        Ok(Self { mask })
    }

    /// Parses strings such as `"xz"`, `"XYZ"` or `"Z,X"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for c in s.chars().filter(|c| !matches!(c, ',' | ' ' | '{' | '}')) {
            ops.push(
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::InvalidOperatorSet(format!("unknown label {c:?}")))?,
            );
        }
        Self::new(&ops)
    }

    pub fn contains(self, op: Pauli) -> bool {
        op.xyz_index()
            .is_some_and(|idx| self.mask & (1 << idx) != 0)
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    /// Canonical position of `op` within the set.
    pub fn position(self, op: Pauli) -> Option<usize> {
        self.iter().position(|p| p == op)
    }

    pub fn iter(self) -> impl Iterator<Item = Pauli> {
        NON_IDENTITY.into_iter().filter(move |&p| self.contains(p))
    }

    /// All ordered pairs `(P, Q)` with both members in the set, lexicographic.
    pub fn pairs(self) -> impl Iterator<Item = (Pauli, Pauli)> {
        self.iter()
            .flat_map(move |p| self.iter().map(move |q| (p, q)))
    }

    /// Compact lowercase label, e.g. `"xyz"`.
    pub fn label(self) -> alloc::string::String {
        self.iter()
            .map(|p| p.symbol().to_ascii_lowercase())
            .collect()
    }
}

impl fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Classical restricted Boltzmann machine (hidden operators `{Z}`).
    Rbm,
    /// Semi-quantum restricted Boltzmann machine.
    SqRbm,
    /// Semi-quantum Boltzmann machine with lateral couplings; oracle only.
    SqBm,
}

impl Family {
    pub const fn name(self) -> &'static str {
        match self {
            Family::Rbm => "RBM",
            Family::SqRbm => "sqRBM",
            Family::SqBm => "sqBM",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "RBM" | "rbm" => Some(Family::Rbm),
            "sqRBM" | "sqrbm" => Some(Family::SqRbm),
            "sqBM" | "sqbm" => Some(Family::SqBm),
            _ => None,
        }
    }

    pub const fn is_restricted(self) -> bool {
        matches!(self, Family::Rbm | Family::SqRbm)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Structural description of a model: `n` visible units, `m` hidden units, hidden operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    n: usize,
    m: usize,
    hidden_ops: OperatorSet,
    family: Family,
}

impl ModelSpec {
    pub fn new(family: Family, n: usize, m: usize, hidden_ops: OperatorSet) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSpec(format!(
                "unit counts must be positive (n = {n}, m = {m})"
            )));
        }
        if n > 63 {
            return Err(Error::InvalidSpec(format!(
                "{n} visible units do not fit a u64 bitstring"
            )));
        }
        match family {
            Family::Rbm if hidden_ops != OperatorSet::Z => {
                return Err(Error::InvalidSpec(format!(
                    "RBM requires hidden operators {{Z}}, got {hidden_ops}"
                )))
            }
            Family::SqRbm if hidden_ops == OperatorSet::Z => {
                return Err(Error::InvalidSpec(
                    "sqRBM with hidden operators {Z} is an RBM".to_string(),
                ))
            }
            _ => {}
        }
        Ok(Self {
            n,
            m,
            hidden_ops,
            family,
        })
    }

    pub fn rbm(n: usize, m: usize) -> Result<Self> {
        Self::new(Family::Rbm, n, m, OperatorSet::Z)
    }

    pub fn sq_rbm(n: usize, m: usize, hidden_ops: OperatorSet) -> Result<Self> {
        Self::new(Family::SqRbm, n, m, hidden_ops)
    }

    pub fn sq_bm(n: usize, m: usize, hidden_ops: OperatorSet) -> Result<Self> {
        Self::new(Family::SqBm, n, m, hidden_ops)
    }

    /// Restricted spec for a hidden operator set: RBM for `{Z}`, sqRBM otherwise.
    pub fn restricted(n: usize, m: usize, hidden_ops: OperatorSet) -> Result<Self> {
        if hidden_ops == OperatorSet::Z {
            Self::rbm(n, m)
        } else {
            Self::sq_rbm(n, m, hidden_ops)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn hidden_ops(&self) -> OperatorSet {
        self.hidden_ops
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn qubits(&self) -> usize {
        self.n + self.m
    }

    /// Length of the flat parameter vector, laterals included.
    pub fn flat_len(&self) -> usize {
        let restricted = self.n + self.hidden_ops.len() * self.m * (self.n + 1);
        match self.family {
            Family::SqBm => {
                restricted
                    + upper_len(self.n)
                    + self.hidden_ops.len() * self.hidden_ops.len() * upper_len(self.m)
            }
            _ => restricted,
        }
    }
}

/// Number of parameters of a restricted model, `n + |W_h|·m·(n+1)`.
pub fn param_count(spec: &ModelSpec) -> Result<usize> {
    if !spec.family.is_restricted() {
        return Err(Error::RestrictedOnly(spec.family));
    }
    Ok(spec.flat_len())
}

/// Number of strictly upper-triangular entries of a `k × k` matrix.
pub const fn upper_len(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Packed index of `(i, j)`, `i < j < k`, in row-major strict upper-triangular storage.
pub fn upper_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// `(i, j)` pairs with `i < j < k` in packed order.
pub fn upper_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

/// Parameters attached to one hidden Pauli channel `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub op: Pauli,
    /// `b_j^P`, length `m`.
    pub bias: Vec<f64>,
    /// `w_{i,j}^{Z,P}`, `n × m` row-major.
    pub weights: Vec<f64>,
}

/// Lateral couplings of the fully connected family, stored strictly upper-triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct Laterals {
    /// `θ_{i,j}^{Z,Z}` for visible `i < j`, packed.
    pub visible: Vec<f64>,
    /// One packed `m × m` block per `(P, Q)` in [`OperatorSet::pairs`] order.
    pub hidden: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    /// `a_i^Z`, length `n`.
    pub visible: Vec<f64>,
    /// One entry per hidden operator, canonical order.
    pub channels: Vec<Channel>,
    pub laterals: Option<Laterals>,
}

/// Flat parameter vector in canonical order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatParams(pub Vec<f64>);

impl FlatParams {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl core::ops::Deref for FlatParams {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl core::ops::DerefMut for FlatParams {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for FlatParams {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Parameters {
    pub fn zeros(spec: &ModelSpec) -> Self {
        let (n, m) = (spec.n, spec.m);
        let laterals = (spec.family == Family::SqBm).then(|| Laterals {
            visible: vec![0.0; upper_len(n)],
            hidden: spec
                .hidden_ops
                .pairs()
                .map(|_| vec![0.0; upper_len(m)])
                .collect(),
        });
        Self {
            visible: vec![0.0; n],
            channels: spec
                .hidden_ops
                .iter()
                .map(|op| Channel {
                    op,
                    bias: vec![0.0; m],
                    weights: vec![0.0; n * m],
                })
                .collect(),
            laterals,
        }
    }

    pub fn channel(&self, op: Pauli) -> Option<&Channel> {
        self.channels.iter().find(|c| c.op == op)
    }

    pub fn channel_mut(&mut self, op: Pauli) -> Option<&mut Channel> {
        self.channels.iter_mut().find(|c| c.op == op)
    }

    /// Checks shapes, channel keys and finiteness against `spec`.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        self.validate_shapes(spec)?;
        check_finite("a", &self.visible)?;
        for channel in &self.channels {
            check_finite(&format!("b.{}", channel.op), &channel.bias)?;
            check_finite(&format!("w.{}", channel.op), &channel.weights)?;
        }
        if let Some(lat) = &self.laterals {
            check_finite("lateral_v", &lat.visible)?;
            for (block, (p, q)) in lat.hidden.iter().zip(spec.hidden_ops.pairs()) {
                check_finite(&format!("lateral_h.{p}{q}"), block)?;
            }
        }
        Ok(())
    }

    /// Flattens into canonical order. Fails with the name of the first malformed field.
    pub fn flatten(&self, spec: &ModelSpec) -> Result<FlatParams> {
        self.validate_shapes(spec)?;
        let mut out = Vec::with_capacity(spec.flat_len());
        out.extend_from_slice(&self.visible);
        for channel in &self.channels {
            out.extend_from_slice(&channel.bias);
        }
        for channel in &self.channels {
            out.extend_from_slice(&channel.weights);
        }
        if let Some(lat) = &self.laterals {
            out.extend_from_slice(&lat.visible);
            for block in &lat.hidden {
                out.extend_from_slice(block);
            }
        }
        Ok(FlatParams(out))
    }

    pub fn unflatten(spec: &ModelSpec, flat: &[f64]) -> Result<Self> {
        check_len("flat", flat.len(), spec.flat_len())?;
        let (n, m) = (spec.n, spec.m);
        let mut rest = flat;
        let mut take = |k: usize| {
            let (head, tail) = rest.split_at(k);
            rest = tail;
            head.to_vec()
        };
        let visible = take(n);
        let biases: Vec<_> = spec.hidden_ops.iter().map(|_| take(m)).collect();
        let weights: Vec<_> = spec.hidden_ops.iter().map(|_| take(n * m)).collect();
        let laterals = (spec.family == Family::SqBm).then(|| Laterals {
            visible: take(upper_len(n)),
            hidden: spec
                .hidden_ops
                .pairs()
                .map(|_| take(upper_len(m)))
                .collect(),
        });
        let channels = spec
            .hidden_ops
            .iter()
            .zip(biases)
            .zip(weights)
            .map(|((op, bias), weights)| Channel { op, bias, weights })
            .collect();
        Ok(Self {
            visible,
            channels,
            laterals,
        })
    }

    fn validate_shapes(&self, spec: &ModelSpec) -> Result<()> {
        let (n, m) = (spec.n, spec.m);
        check_len("a", self.visible.len(), n)?;
        check_len("channels", self.channels.len(), spec.hidden_ops.len())?;
        for (channel, op) in self.channels.iter().zip(spec.hidden_ops.iter()) {
            if channel.op != op {
                return Err(Error::InvalidSpec(format!(
                    "channel {} does not match operator set {}",
                    channel.op, spec.hidden_ops
                )));
            }
            check_len(&format!("b.{op}"), channel.bias.len(), m)?;
            check_len(&format!("w.{op}"), channel.weights.len(), n * m)?;
        }
        match (&self.laterals, spec.family) {
            (Some(lat), Family::SqBm) => {
                check_len("lateral_v", lat.visible.len(), upper_len(n))?;
                let pairs = spec.hidden_ops.len() * spec.hidden_ops.len();
                check_len("lateral_h", lat.hidden.len(), pairs)?;
                for (block, (p, q)) in lat.hidden.iter().zip(spec.hidden_ops.pairs()) {
                    check_len(&format!("lateral_h.{p}{q}"), block.len(), upper_len(m))?;
                }
                Ok(())
            }
            (None, Family::SqBm) => Err(Error::InvalidSpec(
                "sqBM requires lateral couplings".to_string(),
            )),
            (Some(_), family) => Err(Error::InvalidSpec(format!(
                "lateral couplings are only valid for sqBM, not {family}"
            ))),
            (None, _) => Ok(()),
        }
    }
}

fn check_len(field: &str, found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            field: field.to_string(),
            expected,
            found,
        })
    }
}

fn check_finite(field: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(field.to_string()))
    }
}

/// Every entry i.i.d. uniform on `[lo, hi]`, drawn in flat order from a ChaCha8 stream seeded by `seed`.
pub fn init_uniform(spec: &ModelSpec, seed: u64, lo: f64, hi: f64) -> Result<Parameters> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..spec.flat_len())
        .map(|_| rng.random_range(lo..=hi))
        .collect();
    Parameters::unflatten(spec, &flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_counts() {
        let z = ModelSpec::rbm(8, 4).unwrap();
        let xz = ModelSpec::sq_rbm(8, 4, OperatorSet::XZ).unwrap();
        let xyz = ModelSpec::sq_rbm(8, 4, OperatorSet::XYZ).unwrap();
        assert_eq!(param_count(&z).unwrap(), 44);
        assert_eq!(param_count(&xz).unwrap(), 80);
        assert_eq!(param_count(&xyz).unwrap(), 116);
    }

    #[test]
    fn count_rejects_fully_connected() {
        let spec = ModelSpec::sq_bm(3, 2, OperatorSet::XZ).unwrap();
        let err = param_count(&spec).unwrap_err();
        assert!(err
            .to_string()
            .contains("count defined only for restricted families"));
    }

    #[test]
    fn operator_set_is_canonical() {
        let a = OperatorSet::new(&[Pauli::Z, Pauli::X]).unwrap();
        let b = OperatorSet::new(&[Pauli::X, Pauli::Z]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, OperatorSet::XZ);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![Pauli::X, Pauli::Z]);
        assert_eq!(OperatorSet::parse("zyx").unwrap(), OperatorSet::XYZ);
        assert_eq!(alloc::format!("{}", OperatorSet::XYZ), "{X,Y,Z}");
    }

    #[test]
    fn operator_set_rejects_bad_input() {
        assert!(OperatorSet::new(&[]).is_err());
        assert!(OperatorSet::new(&[Pauli::X, Pauli::X]).is_err());
        assert!(OperatorSet::new(&[Pauli::I]).is_err());
        assert!(OperatorSet::parse("xq").is_err());
    }

    #[test]
    fn rbm_iff_z() {
        assert!(ModelSpec::new(Family::Rbm, 2, 2, OperatorSet::XZ).is_err());
        assert!(ModelSpec::new(Family::SqRbm, 2, 2, OperatorSet::Z).is_err());
        assert!(ModelSpec::new(Family::Rbm, 0, 2, OperatorSet::Z).is_err());
    }

    #[test]
    fn flatten_zero_and_order() {
        let spec = ModelSpec::sq_rbm(1, 1, OperatorSet::XZ).unwrap();
        let flat = Parameters::zeros(&spec).flatten(&spec).unwrap();
        assert_eq!(flat.0, vec![0.0; 5]);

        let spec = ModelSpec::rbm(2, 1).unwrap();
        let params = Parameters {
            visible: vec![1.0, 2.0],
            channels: vec![Channel {
                op: Pauli::Z,
                bias: vec![3.0],
                weights: vec![4.0, 5.0],
            }],
            laterals: None,
        };
        assert_eq!(
            params.flatten(&spec).unwrap().0,
            vec![1.0, 2.0, 3.0, 4.0, 5.0]
        );
    }

    #[test]
    fn flatten_names_offending_field() {
        let spec = ModelSpec::sq_rbm(2, 2, OperatorSet::XZ).unwrap();
        let mut params = Parameters::zeros(&spec);
        params.channels[1].weights.pop();
        match params.flatten(&spec) {
            Err(Error::ShapeMismatch { field, .. }) => assert_eq!(field, "w.Z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn laterals_only_for_sqbm() {
        let spec = ModelSpec::sq_bm(3, 2, OperatorSet::XZ).unwrap();
        let params = Parameters::zeros(&spec);
        assert_eq!(params.flatten(&spec).unwrap().len(), spec.flat_len());
        assert_eq!(spec.flat_len(), 3 + 2 * 2 * 4 + 3 + 4);
        let rbm = ModelSpec::rbm(3, 2).unwrap();
        let mut bad = Parameters::zeros(&rbm);
        bad.laterals = params.laterals.clone();
        assert!(bad.validate(&rbm).is_err());
    }

    #[test]
    fn packed_upper_index() {
        for k in 1..7 {
            for (idx, (i, j)) in upper_pairs(k).enumerate() {
                assert_eq!(upper_index(i, j, k), idx);
            }
            assert_eq!(upper_pairs(k).count(), upper_len(k));
        }
    }

    #[test]
    fn init_is_deterministic_and_seeded() {
        let spec = ModelSpec::sq_rbm(4, 3, OperatorSet::XYZ).unwrap();
        let a = init_uniform(&spec, 1, -1.0, 1.0).unwrap();
        let b = init_uniform(&spec, 1, -1.0, 1.0).unwrap();
        let c = init_uniform(&spec, 2, -1.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(init_uniform(&spec, 1, 1.0, 1.0).is_err());
        assert!(init_uniform(&spec, 1, 2.0, -1.0).is_err());
    }

    #[test]
    fn init_mean_near_zero() {
        // 100_000 draws: 7 + 3·3·8 = 79 per instance over many seeds.
        let spec = ModelSpec::sq_rbm(7, 3, OperatorSet::XYZ).unwrap();
        let per = spec.flat_len();
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut seed = 0;
        while count < 100_000 {
            let flat = init_uniform(&spec, seed, -1.0, 1.0)
                .unwrap()
                .flatten(&spec)
                .unwrap();
            for x in flat.iter().take((100_000 - count).min(per)) {
                assert!((-1.0..=1.0).contains(x));
                sum += x;
                count += 1;
            }
            seed += 1;
        }
        assert!((sum / count as f64).abs() < 0.02);
    }

    fn any_spec() -> impl Strategy<Value = ModelSpec> {
        (1usize..6, 1usize..5, 1u8..8, 0usize..3).prop_map(|(n, m, mask, fam)| {
            let ops: Vec<_> = NON_IDENTITY
                .into_iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, p)| p)
                .collect();
            let ops = OperatorSet::new(&ops).unwrap();
            match fam {
                0 => ModelSpec::rbm(n, m).unwrap(),
                1 => ModelSpec::restricted(n, m, ops).unwrap(),
                _ => ModelSpec::sq_bm(n, m, ops).unwrap(),
            }
        })
    }

    proptest! {
        #[test]
        fn flatten_roundtrip(spec in any_spec(), seed in any::<u64>()) {
            let params = init_uniform(&spec, seed, -3.0, 3.0).unwrap();
            let flat = params.flatten(&spec).unwrap();
            prop_assert_eq!(flat.len(), spec.flat_len());
            if spec.family().is_restricted() {
                prop_assert_eq!(flat.len(), param_count(&spec).unwrap());
            }
            let back = Parameters::unflatten(&spec, &flat).unwrap();
            prop_assert_eq!(&back, &params);
            let again = back.flatten(&spec).unwrap();
            prop_assert!(flat.iter().zip(again.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
