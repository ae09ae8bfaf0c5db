use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use super::{PolyRecurrence, PrsError};
use crate::modarith::{add_mod, mul_mod, pow_mod, reduce_bigint, Residue};
use crate::periodic::{CycleCertificate, EventuallyPeriodic};

/// Window `(a_{n-c+1}, ..., a_n)` reduced modulo `m`, oldest vector first,
/// stored flat with `k` entries per vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModState {
    modulus: u64,
    dim: usize,
    window: Vec<u64>,
}

impl ModState {
    /// The window of initial vectors `a_1, ..., a_c`.
    pub fn initial(prs: &PolyRecurrence, modulus: u64) -> Result<Self, PrsError> {
        if modulus == 0 {
            return Err(PrsError::ZeroModulus);
        }
        let window = prs
            .initial()
            .iter()
            .flat_map(|v| v.iter().map(|x| reduce_bigint(x, modulus)))
            .collect();
        Ok(Self {
            modulus,
            dim: prs.dim(),
            window,
        })
    }

    /// Builds a state from explicit vectors, oldest first.
    pub fn from_vectors(modulus: u64, vectors: &[Vec<u64>]) -> Result<Self, PrsError> {
        if modulus == 0 {
            return Err(PrsError::ZeroModulus);
        }
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(PrsError::EmptyShape);
        }
        Ok(Self {
            modulus,
            dim,
            window: vectors.iter().flatten().map(|x| x % modulus).collect(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn vectors(&self) -> Vec<Vec<u64>> {
        self.window.chunks(self.dim).map(<[u64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone)]
struct ModTerm {
    coeff: u64,
    factors: Vec<(usize, u64)>,
}

/// The update map compiled for one modulus.
#[derive(Debug, Clone)]
pub struct ModStepper {
    modulus: u64,
    dim: usize,
    depth: usize,
    polys: Vec<Vec<ModTerm>>,
}

impl ModStepper {
    pub fn new(prs: &PolyRecurrence, modulus: u64) -> Result<Self, PrsError> {
        if modulus == 0 {
            return Err(PrsError::ZeroModulus);
        }
        let (dim, depth) = (prs.dim(), prs.depth());
        let polys = prs
            .updates()
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(exps, coeff)| ModTerm {
                        coeff: reduce_bigint(coeff, modulus),
                        factors: exps
                            .iter()
                            .map(|&(v, e)| ((depth - v.lag) * dim + v.coord - 1, e as u64))
                            .collect(),
                    })
                    .filter(|t| t.coeff != 0)
                    .collect()
            })
            .collect();
        Ok(Self {
            modulus,
            dim,
            depth,
            polys,
        })
    }

    /// Size of the state space, `m^{kc}`.
    pub fn state_space(&self) -> BigUint {
        BigUint::from(self.modulus).pow((self.dim * self.depth) as u32)
    }

    fn next_vector(&self, window: &[u64], out: &mut Vec<u64>) {
        let m = self.modulus;
        out.clear();
        for terms in &self.polys {
            let mut acc = 0;
            for t in terms {
                let mut v = t.coeff;
                for &(idx, e) in &t.factors {
                    v = mul_mod(v, pow_mod(window[idx], e, m), m);
                }
                acc = add_mod(acc, v, m);
            }
            out.push(acc);
        }
    }

    /// Applies the reduced update map once and shifts the window.
    pub fn step(&self, state: &ModState) -> ModState {
        let mut next = state.clone();
        self.step_in_place(&mut next.window, &mut Vec::with_capacity(self.dim));
        next
    }

    fn step_in_place(&self, window: &mut Vec<u64>, scratch: &mut Vec<u64>) {
        self.next_vector(window, scratch);
        window.drain(..self.dim);
        window.extend_from_slice(scratch);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectConfig {
    /// 1-based coordinate projected to the scalar sequence.
    pub coordinate: usize,
    /// Hard cap on iterations of the update map.
    pub step_budget: Option<u64>,
    /// Largest state space tracked with a hash map; beyond it Brent's
    /// constant-memory scheme is used.
    pub memory_cap: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            coordinate: 1,
            step_budget: None,
            memory_cap: 1 << 24,
        }
    }
}

/// Outcome of cycle detection for one modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub sequence: EventuallyPeriodic,
    /// First step index whose state recurs.
    pub state_preperiod: u64,
    pub state_period: u64,
    /// `m^{kc}`.
    pub state_space: BigUint,
}

impl Detection {
    /// The window sequence repeats within the first `m^{kc} + 1` steps.
    pub fn within_pigeonhole_bound(&self) -> bool {
        BigUint::from(self.state_preperiod + self.state_period) <= &self.state_space + 1u32
    }
}

/// Finds the minimal eventually periodic form of `a_n mod m`.
pub fn detect(prs: &PolyRecurrence, modulus: u64, config: &DetectConfig) -> Result<Detection, PrsError> {
    if config.coordinate == 0 || config.coordinate > prs.dim() {
        return Err(PrsError::BadCoordinate {
            coord: config.coordinate,
            dim: prs.dim(),
        });
    }
    let stepper = ModStepper::new(prs, modulus)?;
    let start = ModState::initial(prs, modulus)?;
    let state_space = stepper.state_space();
    let (mu, lambda) = if state_space <= BigUint::from(config.memory_cap) {
        find_cycle_hashed(&stepper, &start, config.step_budget)?
    } else {
        find_cycle_brent(&stepper, &start, config.step_budget)?
    };

    // a_1..a_c come from the start window; step t yields a_{c+t}.
    let need = (mu + lambda) as usize;
    let coord = config.coordinate;
    let dim = prs.dim();
    let mut scalars: Vec<u64> = start
        .window
        .chunks(dim)
        .map(|v| v[coord - 1])
        .collect();
    let mut window = start.window.clone();
    let mut scratch = Vec::with_capacity(dim);
    while scalars.len() < need {
        stepper.step_in_place(&mut window, &mut scratch);
        scalars.push(window[window.len() - dim + coord - 1]);
    }
    let sequence = EventuallyPeriodic::normalize(
        modulus,
        &scalars,
        CycleCertificate {
            preperiod: mu as usize,
            period: lambda as usize,
        },
    )?;
    Ok(Detection {
        sequence,
        state_preperiod: mu,
        state_period: lambda,
        state_space,
    })
}

fn check_budget(steps: u64, budget: Option<u64>) -> Result<(), PrsError> {
    match budget {
        Some(b) if steps > b => Err(PrsError::BudgetExceeded(b)),
        _ => Ok(()),
    }
}

fn find_cycle_hashed(
    stepper: &ModStepper,
    start: &ModState,
    budget: Option<u64>,
) -> Result<(u64, u64), PrsError> {
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut window = start.window.clone();
    let mut scratch = Vec::with_capacity(stepper.dim);
    let mut t = 0u64;
    loop {
        if let Some(&first) = seen.get(&window) {
            return Ok((first, t - first));
        }
        seen.insert(window.clone(), t);
        t += 1;
        check_budget(t, budget)?;
        stepper.step_in_place(&mut window, &mut scratch);
    }
}

fn find_cycle_brent(
    stepper: &ModStepper,
    start: &ModState,
    budget: Option<u64>,
) -> Result<(u64, u64), PrsError> {
    let mut scratch = Vec::with_capacity(stepper.dim);
    let advance = |w: &mut Vec<u64>, s: &mut Vec<u64>| stepper.step_in_place(w, s);
    let mut steps = 0u64;

    let mut power = 1u64;
    let mut lambda = 1u64;
    let mut tortoise = start.window.clone();
    let mut hare = start.window.clone();
    advance(&mut hare, &mut scratch);
    while tortoise != hare {
        if power == lambda {
            tortoise.clone_from(&hare);
            power *= 2;
            lambda = 0;
        }
        advance(&mut hare, &mut scratch);
        lambda += 1;
        steps += 1;
        check_budget(steps, budget)?;
    }

    let mut tortoise = start.window.clone();
    let mut hare = start.window.clone();
    for _ in 0..lambda {
        advance(&mut hare, &mut scratch);
    }
    let mut mu = 0u64;
    while tortoise != hare {
        advance(&mut tortoise, &mut scratch);
        advance(&mut hare, &mut scratch);
        mu += 1;
        steps += 1;
        check_budget(steps, budget)?;
    }
    Ok((mu, lambda))
}

/// One-shot `a_n mod m` without caching.
pub fn eval_mod(prs: &PolyRecurrence, modulus: u64, n: &BigUint) -> Result<Residue, PrsError> {
    if n.is_zero() {
        return Err(PrsError::ZeroIndex);
    }
    let detection = detect(prs, modulus, &DetectConfig::default())?;
    Ok(detection.sequence.lookup(n)?)
}

/// On-disk store of compiled tables keyed by a content hash of the
/// recurrence text, the projected coordinate and the modulus.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(prs: &PolyRecurrence, coordinate: usize) -> String {
        let mut h = Sha256::new();
        h.update(prs.to_string().as_bytes());
        h.update(format!("coordinate {coordinate}\n").as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str, modulus: u64) -> PathBuf {
        self.dir.join(format!("{key}-m{modulus}.ep"))
    }

    fn load(&self, key: &str, modulus: u64) -> Option<EventuallyPeriodic> {
        let text = fs::read_to_string(self.path(key, modulus)).ok()?;
        let ep: EventuallyPeriodic = text.parse().ok()?;
        (ep.modulus() == modulus).then_some(ep)
    }

    fn store(&self, key: &str, ep: &EventuallyPeriodic) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let target = self.path(key, ep.modulus());
        let tmp = self.dir.join(format!(
            ".{key}-m{}.{}.{:?}.tmp",
            ep.modulus(),
            std::process::id(),
            std::thread::current().id()
        ));
        fs::write(&tmp, format!("{ep}\n"))?;
        // rename is atomic, so concurrent writers of one key never interleave
        fs::rename(&tmp, target)
    }
}

/// Evaluates `a_n mod m` for one recurrence, compiling each modulus once.
#[derive(Debug)]
pub struct Evaluator {
    prs: PolyRecurrence,
    config: DetectConfig,
    key: String,
    compiled: Mutex<HashMap<u64, Arc<EventuallyPeriodic>>>,
    disk: Option<DiskCache>,
}

impl Evaluator {
    pub fn new(prs: PolyRecurrence, config: DetectConfig) -> Self {
        let key = DiskCache::key(&prs, config.coordinate);
        Self {
            prs,
            config,
            key,
            compiled: Mutex::new(HashMap::new()),
            disk: None,
        }
    }

    pub fn with_disk_cache(mut self, cache: DiskCache) -> Self {
        self.disk = Some(cache);
        self
    }

    pub fn recurrence(&self) -> &PolyRecurrence {
        &self.prs
    }

    /// The compiled table for `modulus`, from memory, disk, or detection.
    pub fn compiled(&self, modulus: u64) -> Result<Arc<EventuallyPeriodic>, PrsError> {
        if modulus == 0 {
            return Err(PrsError::ZeroModulus);
        }
        if let Some(ep) = self.compiled.lock().unwrap().get(&modulus) {
            return Ok(Arc::clone(ep));
        }
        let from_disk = self.disk.as_ref().and_then(|d| d.load(&self.key, modulus));
        let ep = match from_disk {
            Some(ep) => ep,
            None => {
                let ep = detect(&self.prs, modulus, &self.config)?.sequence;
                if let Some(disk) = &self.disk {
                    // a failed write only costs a recomputation next time
                    let _ = disk.store(&self.key, &ep);
                }
                ep
            }
        };
        let ep = Arc::new(ep);
        self.compiled
            .lock()
            .unwrap()
            .entry(modulus)
            .or_insert_with(|| Arc::clone(&ep));
        Ok(ep)
    }

    pub fn eval_mod(&self, modulus: u64, n: &BigUint) -> Result<Residue, PrsError> {
        if n.is_zero() {
            return Err(PrsError::ZeroIndex);
        }
        Ok(self.compiled(modulus)?.lookup(n)?)
    }
}
