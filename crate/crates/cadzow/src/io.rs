//! File formats: HTNS tensor files, trace CSVs and benchmark suite
//! configs.
//!
//! The HTNS format is a minimal binary container for complex tensors:
//!
//! ```text
//! offset 0   magic  "HTNS"
//! offset 4   version byte (1)
//! offset 5   ndim as one byte
//! offset 6   extents, ndim x u64 little-endian
//! then       payload, interleaved (re, im) f64 little-endian, row-major
//! ```
//!
//! Round trips are bit-exact. Parse errors name the byte offset at which
//! reading failed.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metrics::{ExperimentConfig, GeneratorKind};
use crate::solvers::{SolverRun, Variant};
use crate::tensor::ComplexTensor;

const MAGIC: &[u8; 4] = b"HTNS";
const VERSION: u8 = 1;

/// Serializes a tensor into the HTNS byte layout.
pub fn tensor_to_bytes(t: &ComplexTensor) -> Result<Vec<u8>> {
    if t.ndim() > u8::MAX as usize {
        return Err(Error::Shape(format!("{} dimensions exceed the format limit", t.ndim())));
    }
    let mut out = Vec::with_capacity(6 + 8 * t.ndim() + 16 * t.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(t.ndim() as u8);
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for c in t.data() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    Ok(out)
}

/// Parses the HTNS byte layout back into a tensor.
pub fn tensor_from_bytes(bytes: &[u8]) -> Result<ComplexTensor> {
    let parse_err = |offset: usize, msg: &str| Error::Parse {
        offset: offset as u64,
        msg: msg.to_string(),
    };
    if bytes.len() < 6 {
        return Err(parse_err(bytes.len(), "truncated header"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(parse_err(0, "bad magic, expected \"HTNS\""));
    }
    if bytes[4] != VERSION {
        return Err(parse_err(4, &format!("unsupported version {}", bytes[4])));
    }
    let ndim = bytes[5] as usize;
    if ndim == 0 {
        return Err(parse_err(5, "zero dimensions"));
    }
    let header_len = 6 + 8 * ndim;
    if bytes.len() < header_len {
        return Err(parse_err(bytes.len(), "truncated extents"));
    }
    let mut dims = Vec::with_capacity(ndim);
    let mut n: usize = 1;
    for i in 0..ndim {
        let off = 6 + 8 * i;
        let d = u64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
        let d = usize::try_from(d).map_err(|_| parse_err(off, "extent overflows usize"))?;
        if d == 0 {
            return Err(parse_err(off, "zero extent"));
        }
        n = n
            .checked_mul(d)
            .ok_or_else(|| parse_err(off, "extent product overflows"))?;
        dims.push(d);
    }
    let expected = header_len + 16 * n;
    if bytes.len() != expected {
        return Err(parse_err(
            bytes.len().min(expected),
            &format!("payload length {} != expected {}", bytes.len() - header_len, 16 * n),
        ));
    }
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let off = header_len + 16 * i;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().expect("8 bytes"));
        data.push(Complex64::new(re, im));
    }
    ComplexTensor::new(dims, data)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &ComplexTensor) -> Result<()> {
    let bytes = tensor_to_bytes(t)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<ComplexTensor> {
    tensor_from_bytes(&fs::read(path)?)
}

/// Renders a solver trace as CSV with columns `iter,rel_change,mse,seconds`.
pub fn trace_to_csv(run: &SolverRun) -> String {
    let mut out = String::from("iter,rel_change,mse,seconds\n");
    for rec in &run.trace {
        let mse = rec.mse.map(|m| format!("{m:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{},{:.6}\n",
            rec.iter, rec.rel_change, mse, rec.seconds
        ));
    }
    out
}

/// Named suite presets: desk-scale versions of the standard experiment
/// tables plus the two seismic tasks.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |name: &str, generator, dims: Vec<usize>, rank| ExperimentConfig {
        name: name.to_string(),
        generator,
        dims,
        rank,
        eps: 0.0,
        fraction: None,
        tol: Some(1e-6),
        max_iter: 500,
        alpha: 0.8,
        variants: vec![Variant::Cadzow, Variant::FastCadzow],
        trials: 10,
    };
    match name {
        // Spectral denoising: both rank-truncation variants land on the
        // same fixed point.
        "table1-small" => {
            let mut c = base(name, GeneratorKind::Spectral, vec![1024], 5);
            c.eps = 0.5;
            Ok(c)
        }
        // Noiseless recovery from a 50% mask with pinned observations.
        "table2-small" => {
            let mut c = base(name, GeneratorKind::Spectral, vec![512], 5);
            c.fraction = Some(0.5);
            c.tol = Some(1e-10);
            c.alpha = 1.0;
            Ok(c)
        }
        // Simultaneous denoising and recovery with a partial blend.
        "table3-small" => {
            let mut c = base(name, GeneratorKind::Spectral, vec![512], 5);
            c.eps = 0.1;
            c.fraction = Some(0.5);
            c.alpha = 0.8;
            Ok(c)
        }
        // Dirac-stream denoising in the Fourier domain.
        "table4-small" => {
            let mut c = base(name, GeneratorKind::DiracFourier, vec![71], 7);
            c.eps = 0.1;
            c.trials = 50;
            Ok(c)
        }
        // Fixed-iteration comparison of all four variants.
        "table5-small" => {
            let mut c = base(name, GeneratorKind::Spectral, vec![256], 5);
            c.eps = 0.5;
            c.tol = None;
            c.max_iter = 15;
            c.variants = Variant::ALL.to_vec();
            c.trials = 100;
            Ok(c)
        }
        "seismic-denoise-small" => {
            let mut c = base(name, GeneratorKind::LinearEvents, vec![256, 8, 8], 3);
            c.eps = 1.0;
            c.tol = None;
            c.max_iter = 10;
            c.variants = vec![Variant::FastCadzow, Variant::FastGradient];
            c.trials = 3;
            Ok(c)
        }
        "seismic-recovery-small" => {
            let mut c = base(name, GeneratorKind::LinearEvents, vec![256, 8, 8], 3);
            c.fraction = Some(0.5);
            c.tol = Some(1e-10);
            c.max_iter = 10;
            c.alpha = 1.0;
            c.trials = 3;
            Ok(c)
        }
        other => Err(Error::Config(format!("unknown preset `{other}`"))),
    }
}

/// Parses a benchmark suite config.
///
/// The format is plain `key = value` text: blank lines separate
/// experiment blocks, `#` starts a comment. A block is either
/// `preset = <name>` (optionally overridden by further keys) or a full
/// experiment spec with the keys `name`, `generator`
/// (spectral|dirac|linear-events), `dims` (`x`-separated extents),
/// `rank`, `eps`, `fraction`, `tol` (a number or `none`), `max_iter`,
/// `alpha`, `variants` (comma-separated) and `trials`.
pub fn parse_suite(text: &str) -> Result<Vec<ExperimentConfig>> {
    let mut configs = Vec::new();
    for (block_idx, block) in split_blocks(text).into_iter().enumerate() {
        let mut config: Option<ExperimentConfig> = None;
        let mut seen_any = false;
        for (key, value) in &block {
            if key == "preset" {
                if seen_any {
                    return Err(Error::Config(format!(
                        "block {}: `preset` must be the first key",
                        block_idx + 1
                    )));
                }
                config = Some(preset(value)?);
            } else {
                let c = config.get_or_insert_with(|| ExperimentConfig {
                    name: format!("block-{}", block_idx + 1),
                    generator: GeneratorKind::Spectral,
                    dims: vec![],
                    rank: 0,
                    eps: 0.0,
                    fraction: None,
                    tol: Some(1e-6),
                    max_iter: 500,
                    alpha: 0.8,
                    variants: vec![],
                    trials: 1,
                });
                apply_key(c, key, value)?;
            }
            seen_any = true;
        }
        if let Some(c) = config {
            validate_config(&c)?;
            configs.push(c);
        }
    }
    Ok(configs)
}

fn split_blocks(text: &str) -> Vec<Vec<(String, String)>> {
    let mut blocks = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
            None => (line.to_string(), String::new()),
        };
        current.push((key, value));
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

fn apply_key(c: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let bad = |what: &str| Error::Config(format!("invalid {what} `{value}`"));
    match key {
        "name" => c.name = value.to_string(),
        "generator" => c.generator = value.parse()?,
        "dims" => {
            c.dims = value
                .split('x')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad("dims")))
                .collect::<Result<_>>()?;
        }
        "rank" | "r" => c.rank = value.parse().map_err(|_| bad("rank"))?,
        "eps" => c.eps = value.parse().map_err(|_| bad("eps"))?,
        "fraction" => {
            c.fraction = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(value.parse().map_err(|_| bad("fraction"))?)
            };
        }
        "tol" => {
            c.tol = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(value.parse().map_err(|_| bad("tol"))?)
            };
        }
        "max_iter" => c.max_iter = value.parse().map_err(|_| bad("max_iter"))?,
        "alpha" => c.alpha = value.parse().map_err(|_| bad("alpha"))?,
        "variants" => {
            c.variants = value
                .split(',')
                .map(|v| v.trim().parse::<Variant>())
                .collect::<Result<_>>()?;
        }
        "trials" => c.trials = value.parse().map_err(|_| bad("trials"))?,
        other => return Err(Error::Config(format!("unknown key `{other}`"))),
    }
    Ok(())
}

fn validate_config(c: &ExperimentConfig) -> Result<()> {
    if c.dims.is_empty() {
        return Err(Error::Config(format!("experiment `{}`: no dims", c.name)));
    }
    if c.rank == 0 {
        return Err(Error::Config(format!("experiment `{}`: no rank", c.name)));
    }
    if c.variants.is_empty() {
        return Err(Error::Config(format!("experiment `{}`: no variants", c.name)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(dims: &[usize], rng: &mut impl Rng) -> ComplexTensor {
        let n: usize = dims.iter().product();
        let data = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexTensor::new(dims.to_vec(), data).unwrap()
    }

    #[test]
    fn roundtrip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for dims in [vec![17], vec![5, 9], vec![3, 4, 5]] {
            let mut t = random_tensor(&dims, &mut rng);
            // Values that stress bit-exactness.
            t.data_mut()[0] = Complex64::new(-0.0, f64::MIN_POSITIVE);
            t.data_mut()[1] = Complex64::new(1.0 + f64::EPSILON, 1e-308);
            let back = tensor_from_bytes(&tensor_to_bytes(&t).unwrap()).unwrap();
            assert_eq!(back.dims(), t.dims());
            for (a, b) in back.data().iter().zip(t.data()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn roundtrip_through_files() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let t = random_tensor(&[6, 7], &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.htns");
        write_tensor(&path, &t).unwrap();
        assert_eq!(read_tensor(&path).unwrap(), t);
    }

    #[test]
    fn parse_errors_name_offsets() {
        let t = ComplexTensor::from_real(vec![3], &[1.0, 2.0, 3.0]).unwrap();
        let bytes = tensor_to_bytes(&t).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        match tensor_from_bytes(&bad_magic) {
            Err(Error::Parse { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }

        let mut bad_version = bytes.clone();
        bad_version[4] = 9;
        match tensor_from_bytes(&bad_version) {
            Err(Error::Parse { offset: 4, .. }) => {}
            other => panic!("{other:?}"),
        }

        let truncated = &bytes[..bytes.len() - 1];
        match tensor_from_bytes(truncated) {
            Err(Error::Parse { .. }) => {}
            other => panic!("{other:?}"),
        }

        match tensor_from_bytes(&bytes[..3]) {
            Err(Error::Parse { offset: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_csv_shape() {
        use crate::solvers::IterRecord;
        let run = SolverRun {
            z: ComplexTensor::zeros(&[2]),
            converged: true,
            iterations: 2,
            trace: vec![
                IterRecord { iter: 1, rel_change: 0.5, mse: Some(0.25), seconds: 0.1 },
                IterRecord { iter: 2, rel_change: 0.1, mse: None, seconds: 0.2 },
            ],
            wall_time_seconds: 0.2,
        };
        let csv = trace_to_csv(&run);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iter,rel_change,mse,seconds");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].contains(",,"), "missing mse renders as empty field");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn presets_resolve() {
        for name in [
            "table1-small",
            "table2-small",
            "table3-small",
            "table4-small",
            "table5-small",
            "seismic-denoise-small",
            "seismic-recovery-small",
        ] {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
            validate_config(&c).unwrap();
        }
        assert!(matches!(preset("table9"), Err(Error::Config(_))));
    }

    #[test]
    fn suite_parse_blocks_and_overrides() {
        let text = "
# two experiments
preset = table5-small
trials = 7

name = custom
generator = spectral
dims = 64
rank = 3
eps = 0.25
tol = none
max_iter = 12
variants = gradient, fast_gradient
trials = 2
";
        let configs = parse_suite(text).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].name, "table5-small");
        assert_eq!(configs[0].trials, 7);
        assert_eq!(configs[1].name, "custom");
        assert_eq!(configs[1].dims, vec![64]);
        assert_eq!(configs[1].tol, None);
        assert_eq!(configs[1].variants, vec![Variant::Gradient, Variant::FastGradient]);
    }

    #[test]
    fn suite_parse_rejects_bad_input() {
        assert!(matches!(parse_suite("preset = nope"), Err(Error::Config(_))));
        assert!(matches!(parse_suite("name = x\nbogus = 1"), Err(Error::Config(_))));
        assert!(matches!(parse_suite("name = x\ntrials = 1"), Err(Error::Config(_))));
        assert!(parse_suite("\n\n# only comments\n").unwrap().is_empty());
        // 2D dims parse
        let c = parse_suite("generator = linear-events\ndims = 128x6x6\nrank = 2\nvariants = fast_cadzow\ntrials = 1").unwrap();
        assert_eq!(c[0].dims, vec![128, 6, 6]);
    }
}
