//! Probability models for the random column vector `w` and their exact
//! second-moment matrices `M_ij = E(w_i w_j)`.
//!
//! Three model families are supported: an explicit finite list of atoms, the
//! multinomial count model (sample `ell` items with replacement from `t`
//! categories and record the counts), and the compound count model where
//! `ell` itself is drawn from a finite law first.
//!
//! # Model file grammar
//!
//! Model files are JSON objects tagged by `"type"`. Rationals are strings
//! `"num/den"` or bare integer strings; floats are rejected.
//!
//! ```text
//! {"type":"atoms","t":2,"atoms":[{"vector":["1","0"],"prob":"1/2"},{"vector":["0","1"],"prob":"1/2"}]}
//! {"type":"multinomial","t":4,"ell":10,"probs":["3/8","1/4","1/4","1/8"]}
//! {"type":"compound","t":2,"probs":["1/2","1/2"],"ell_law":[{"ell":1,"prob":"1/2"},{"ell":2,"prob":"1/2"}]}
//! ```

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::scalar::{int, lcm_of_denominators, serde_rational, serde_rational_vec, ExactScalar};

/// The RNG used for every sampled quantity.
pub type SeededRng = ChaCha8Rng;

/// RNG for stream `stream` of master seed `seed`.
///
/// The split is `ChaCha8Rng::seed_from_u64(seed)` followed by
/// `set_stream(stream)`, so each replicate index gets an independent,
/// reproducible stream regardless of which thread consumes it.
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_probabilities(what: &str, probs: &[ExactScalar]) -> Result<()> {
    if probs.iter().any(Signed::is_negative) {
        return Err(Error::InvalidModel(format!("{what}: negative probability")));
    }
    let total: ExactScalar = probs.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidModel(format!(
            "{what}: probabilities sum to {}, not 1",
            crate::scalar::format_rational(&total)
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "serde_rational_vec")]
    pub vector: Vec<ExactScalar>,
    #[serde(with = "serde_rational")]
    pub prob: ExactScalar,
}

/// Finite-support law of `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteVectorDistribution {
    dimension: usize,
    atoms: Vec<Atom>,
}

impl DiscreteVectorDistribution {
    pub fn new(dimension: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidModel("at least one atom is required".into()));
        }
        if let Some(bad) = atoms.iter().position(|a| a.vector.len() != dimension) {
            return Err(Error::InvalidModel(format!(
                "atom {bad} has {} components, expected {dimension}",
                atoms[bad].vector.len()
            )));
        }
        let probs: Vec<ExactScalar> = atoms.iter().map(|a| a.prob.clone()).collect();
        check_probabilities("atoms", &probs)?;
        Ok(Self { dimension, atoms })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultinomialCountModel {
    ell: u64,
    probs: Vec<ExactScalar>,
}

impl MultinomialCountModel {
    pub fn new(ell: u64, probs: Vec<ExactScalar>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("at least one category is required".into()));
        }
        check_probabilities("multinomial", &probs)?;
        Ok(Self { ell, probs })
    }

    /// ell = 10, p = [3/8, 1/4, 1/4, 1/8]: the model used in the reference experiments.
    pub fn reference() -> Self {
        use crate::scalar::ratio;
        Self::new(10, vec![ratio(3, 8), ratio(1, 4), ratio(1, 4), ratio(1, 8)])
            .expect("reference model is valid")
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn probs(&self) -> &[ExactScalar] {
        &self.probs
    }

    pub fn dimension(&self) -> usize {
        self.probs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundCountModel {
    probs: Vec<ExactScalar>,
    ell_law: Vec<(u64, ExactScalar)>,
}

impl CompoundCountModel {
    pub fn new(probs: Vec<ExactScalar>, ell_law: Vec<(u64, ExactScalar)>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("at least one category is required".into()));
        }
        if ell_law.is_empty() {
            return Err(Error::InvalidModel("ell law must have support".into()));
        }
        check_probabilities("compound categories", &probs)?;
        let weights: Vec<ExactScalar> = ell_law.iter().map(|(_, p)| p.clone()).collect();
        check_probabilities("compound ell law", &weights)?;
        Ok(Self { probs, ell_law })
    }

    pub fn probs(&self) -> &[ExactScalar] {
        &self.probs
    }

    pub fn ell_law(&self) -> &[(u64, ExactScalar)] {
        &self.ell_law
    }

    pub fn dimension(&self) -> usize {
        self.probs.len()
    }
}

/// Symmetric t x t matrix of second moments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentMatrix(ExactMatrix);

impl MomentMatrix {
    /// Wraps a matrix after checking symmetry and a nonnegative diagonal.
    pub fn new(m: ExactMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Dimension("moment matrix must be square and non-empty".into()));
        }
        if !m.is_symmetric() {
            return Err(Error::InvalidModel("moment matrix is not symmetric".into()));
        }
        if (0..m.rows()).any(|i| m[(i, i)].is_negative()) {
            return Err(Error::InvalidModel("moment matrix has a negative diagonal entry".into()));
        }
        Ok(Self(m))
    }

    pub fn dimension(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ExactMatrix {
        self.0
    }

    /// Necessary PSD condition: every sign-adjusted characteristic coefficient is >= 0.
    pub fn passes_psd_coefficient_check(&self) -> bool {
        crate::expected::char_coeffs(self)
            .values()
            .iter()
            .all(|c| !c.is_negative())
    }
}

pub fn moment_matrix_from_atoms(dist: &DiscreteVectorDistribution) -> MomentMatrix {
    let t = dist.dimension();
    let mut m = ExactMatrix::zeros(t, t);
    for atom in dist.atoms() {
        if atom.prob.is_zero() {
            continue;
        }
        for i in 0..t {
            let pv = &atom.prob * &atom.vector[i];
            for j in i..t {
                let term = &pv * &atom.vector[j];
                m[(i, j)] += &term;
                if i != j {
                    m[(j, i)] += term;
                }
            }
        }
    }
    MomentMatrix(m)
}

fn multinomial_entries(ell: u64, probs: &[ExactScalar]) -> ExactMatrix {
    let ell = int(ell as i64);
    let pairs = &ell * (&ell - int(1));
    let t = probs.len();
    ExactMatrix::from_fn(t, t, |i, j| {
        let off = &pairs * &probs[i] * &probs[j];
        if i == j {
            off + &ell * &probs[i]
        } else {
            off
        }
    })
}

/// Diagonal `ell(ell-1)p_i^2 + ell p_i`, off-diagonal `ell(ell-1)p_i p_j`.
pub fn moment_matrix_multinomial(model: &MultinomialCountModel) -> MomentMatrix {
    MomentMatrix(multinomial_entries(model.ell, &model.probs))
}

/// `ell`-law weighted average of the multinomial moments.
pub fn moment_matrix_compound(model: &CompoundCountModel) -> MomentMatrix {
    let t = model.dimension();
    let mut acc = ExactMatrix::zeros(t, t);
    for (ell, weight) in &model.ell_law {
        if weight.is_zero() {
            continue;
        }
        let part = multinomial_entries(*ell, &model.probs);
        for i in 0..t {
            for j in 0..t {
                acc[(i, j)] += weight * &part[(i, j)];
            }
        }
    }
    MomentMatrix(acc)
}

/// Inverse-CDF sampler over a finite exact law.
///
/// Cumulative probabilities are converted once to 64-bit fixed-point
/// thresholds `floor(cum * 2^64)`; a uniform `u64` selects the first
/// category whose threshold exceeds it. Zero-probability categories get
/// empty intervals and are never drawn.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    thresholds: Vec<u128>,
}

impl CategoricalSampler {
    pub fn new(probs: &[ExactScalar]) -> Self {
        let mut cum = ExactScalar::zero();
        let thresholds = probs
            .iter()
            .map(|p| {
                cum += p;
                let scaled: BigInt = (cum.numer() << 64usize) / cum.denom();
                scaled.to_u128().unwrap_or(1u128 << 64)
            })
            .collect();
        Self { thresholds }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.next_u64() as u128;
        let k = self.thresholds.partition_point(|&th| th <= u);
        // The final threshold is exactly 2^64, so k is always in range.
        k.min(self.thresholds.len() - 1)
    }
}

/// Any model the tool can load from a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub enum Model {
    Atoms(DiscreteVectorDistribution),
    Multinomial(MultinomialCountModel),
    Compound(CompoundCountModel),
}

impl Model {
    pub fn dimension(&self) -> usize {
        match self {
            Model::Atoms(d) => d.dimension(),
            Model::Multinomial(m) => m.dimension(),
            Model::Compound(m) => m.dimension(),
        }
    }

    pub fn moment_matrix(&self) -> MomentMatrix {
        match self {
            Model::Atoms(d) => moment_matrix_from_atoms(d),
            Model::Multinomial(m) => moment_matrix_multinomial(m),
            Model::Compound(m) => moment_matrix_compound(m),
        }
    }

    /// The atom list, when the model is given as one.
    pub fn as_atoms(&self) -> Option<&DiscreteVectorDistribution> {
        match self {
            Model::Atoms(d) => Some(d),
            _ => None,
        }
    }

    /// Whether a single vector carries all probability mass.
    pub fn is_deterministic(&self) -> bool {
        match self {
            Model::Atoms(d) => d.atoms().iter().filter(|a| !a.prob.is_zero()).count() == 1,
            Model::Multinomial(m) => m.ell == 0 || m.probs.iter().filter(|p| !p.is_zero()).count() == 1,
            Model::Compound(m) => {
                let ells = m.ell_law.iter().filter(|(_, p)| !p.is_zero()).count();
                let cats = m.probs.iter().filter(|p| !p.is_zero()).count();
                (ells == 1 && cats == 1) || m.ell_law.iter().all(|(l, p)| *l == 0 || p.is_zero())
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EllWeight {
    ell: u64,
    #[serde(with = "serde_rational")]
    prob: ExactScalar,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Atoms {
        t: usize,
        atoms: Vec<Atom>,
    },
    Multinomial {
        t: usize,
        ell: u64,
        #[serde(with = "serde_rational_vec")]
        probs: Vec<ExactScalar>,
    },
    Compound {
        t: usize,
        #[serde(with = "serde_rational_vec")]
        probs: Vec<ExactScalar>,
        ell_law: Vec<EllWeight>,
    },
}

fn check_declared(t: usize, actual: usize) -> Result<()> {
    if t != actual {
        return Err(Error::InvalidModel(format!("declared t = {t} but {actual} categories given")));
    }
    Ok(())
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        match file {
            ModelFile::Atoms { t, atoms } => Ok(Model::Atoms(DiscreteVectorDistribution::new(t, atoms)?)),
            ModelFile::Multinomial { t, ell, probs } => {
                check_declared(t, probs.len())?;
                Ok(Model::Multinomial(MultinomialCountModel::new(ell, probs)?))
            }
            ModelFile::Compound { t, probs, ell_law } => {
                check_declared(t, probs.len())?;
                let law = ell_law.into_iter().map(|w| (w.ell, w.prob)).collect();
                Ok(Model::Compound(CompoundCountModel::new(probs, law)?))
            }
        }
    }
}

impl From<Model> for ModelFile {
    fn from(model: Model) -> Self {
        match model {
            Model::Atoms(d) => ModelFile::Atoms {
                t: d.dimension,
                atoms: d.atoms,
            },
            Model::Multinomial(m) => ModelFile::Multinomial {
                t: m.probs.len(),
                ell: m.ell,
                probs: m.probs,
            },
            Model::Compound(m) => ModelFile::Compound {
                t: m.probs.len(),
                probs: m.probs,
                ell_law: m
                    .ell_law
                    .into_iter()
                    .map(|(ell, prob)| EllWeight { ell, prob })
                    .collect(),
            },
        }
    }
}

/// Draws integer-valued columns for a model.
///
/// Count models produce counts directly. Atom models produce the atom
/// vector multiplied by the least common denominator of all components, so
/// every column is integral; [`ColumnSampler::scale`] reports that factor.
#[derive(Debug, Clone)]
pub struct ColumnSampler {
    kind: SamplerKind,
    dimension: usize,
    scale: BigInt,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms {
        pick: CategoricalSampler,
        columns: Vec<Vec<i64>>,
    },
    Counts {
        category: CategoricalSampler,
        ells: Vec<u64>,
        ell_pick: Option<CategoricalSampler>,
    },
}

impl ColumnSampler {
    pub fn new(model: &Model) -> Result<Self> {
        let dimension = model.dimension();
        let (kind, scale) = match model {
            Model::Atoms(d) => {
                let scale = lcm_of_denominators(d.atoms().iter().flat_map(|a| a.vector.iter()));
                let columns = d
                    .atoms()
                    .iter()
                    .map(|a| {
                        a.vector
                            .iter()
                            .map(|v| {
                                (v.numer() * (&scale / v.denom())).to_i64().ok_or_else(|| {
                                    Error::InvalidModel("scaled atom component exceeds 64 bits".into())
                                })
                            })
                            .collect::<Result<Vec<i64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let probs: Vec<ExactScalar> = d.atoms().iter().map(|a| a.prob.clone()).collect();
                (
                    SamplerKind::Atoms {
                        pick: CategoricalSampler::new(&probs),
                        columns,
                    },
                    scale,
                )
            }
            Model::Multinomial(m) => (
                SamplerKind::Counts {
                    category: CategoricalSampler::new(&m.probs),
                    ells: vec![m.ell],
                    ell_pick: None,
                },
                BigInt::one(),
            ),
            Model::Compound(m) => {
                let weights: Vec<ExactScalar> = m.ell_law.iter().map(|(_, p)| p.clone()).collect();
                (
                    SamplerKind::Counts {
                        category: CategoricalSampler::new(&m.probs),
                        ells: m.ell_law.iter().map(|(l, _)| *l).collect(),
                        ell_pick: Some(CategoricalSampler::new(&weights)),
                    },
                    BigInt::one(),
                )
            }
        };
        Ok(Self { kind, dimension, scale })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Integer factor by which sampled columns exceed the true vectors.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        match &self.kind {
            SamplerKind::Atoms { pick, columns } => columns[pick.sample(rng)].clone(),
            SamplerKind::Counts { category, ells, ell_pick } => {
                let ell = match ell_pick {
                    Some(p) => ells[p.sample(rng)],
                    None => ells[0],
                };
                let mut counts = vec![0i64; self.dimension];
                for _ in 0..ell {
                    counts[category.sample(rng)] += 1;
                }
                counts
            }
        }
    }
}

/// Draws one count vector `(b_1..b_t)` with `sum b_i = ell`.
pub fn sample_count_vector<R: RngCore + ?Sized>(model: &CountModel<'_>, rng: &mut R) -> Vec<u64> {
    let sampler = match model {
        CountModel::Multinomial(m) => ColumnSampler::new(&Model::Multinomial((*m).clone())),
        CountModel::Compound(m) => ColumnSampler::new(&Model::Compound((*m).clone())),
    }
    .expect("count models always build a sampler");
    sampler.sample(rng).into_iter().map(|c| c as u64).collect()
}

/// Borrowed view of either count model.
#[derive(Debug, Clone, Copy)]
pub enum CountModel<'a> {
    Multinomial(&'a MultinomialCountModel),
    Compound(&'a CompoundCountModel),
}
