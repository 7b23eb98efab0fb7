//! Command-line front end.
//!
//! Five subcommands: `analyze` evaluates every measure and identity on one
//! system file, `verify` runs randomized identity suites, `bounds` searches
//! for the capacity upper and lower bounds, `codefn` works the code-function
//! ensemble of a policy system, and `bcec` simulates the erasure-channel
//! signaling scheme. Every subcommand emits an `InfoReport`; exit status is
//! 0 when all requested checks pass, 1 when some check failed, and 2 on
//! malformed input. Reports are byte-identical across runs with the same
//! arguments; the wall clock is printed to stderr only.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::bcec::{empirical_rate_standard_error, simulate_bcec, BcecConfig};
use crate::bounds::{optimize_upper_bound, single_letter_capacity, OptimizerConfig};
use crate::codefn::{
    enumerate_code_functions, good_distribution_from_policy, residual_density_table,
    verify_codefn_information_decomposition, verify_density_equality, CodeFunction, MessageEncoder,
    DEFAULT_RESIDUAL_QUANTILES,
};
use crate::error::{Error, Result};
use crate::feedback::{
    classify_feedback_noisy, decompose_flows, encoder_typicality, feedback_typicality,
    ordering_chain, rate_loss_bound, verify_feedback_flow_identity,
    verify_message_information_identity,
};
use crate::joint::{
    build_joint_fxyz, build_joint_wxyvz, build_joint_wxyz, induced_policy, Caps, JointTable,
};
use crate::kernel::{Kernel, NoiseProcess, SystemShape};
use crate::measures::{
    causal_conditional_directed_information, delayed_directed_information, directed_information,
    entropy, mutual_information, residual_directed_information,
};
use crate::report::{
    BcecSection, BoundsSection, CheckRow, CodefnSection, InfoReport, LowerBoundRow,
    BCEC_ACCOUNTING_NOTE, FINITE_HORIZON_SCOPE_NOTE,
};
use crate::rng::SplitMix64;
use crate::system::{extend_links, sampling, SystemParts, SystemSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

const ORDERING_IDENTITY: &str = "0 <= IR(X^n->Y^n;W) <= I(X^n->Y^n) <= I(X^n;Y^n)";

#[derive(Parser)]
#[command(
    name = "fbflow",
    version,
    about = "Exact analysis of channels with noisy feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all measures and identity checks on one system file.
    Analyze {
        /// System description (JSON).
        #[arg(long)]
        system: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-horizon measure series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Base identity tolerance in bits.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run the randomized identity suites on seeded random systems.
    Verify {
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Optimize the per-symbol capacity upper bound (and the additive-noise
    /// lower bound when the feedback link admits one).
    Bounds {
        #[arg(long)]
        system: PathBuf,
        /// Override the horizon; needs a memoryless channel and exact or
        /// time-invariant additive feedback.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Simplex grid resolution for the exhaustive phase.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the code-function ensemble of a policy system and check the
    /// density and decomposition identities on it.
    Codefn {
        #[arg(long)]
        system: PathBuf,
        /// Include the full code-function enumeration in the report.
        #[arg(long)]
        dump: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the codeword-erasure signaling scheme.
    Bcec {
        /// Bits per codeword (one framing, m-1 payload).
        #[arg(long)]
        m: usize,
        /// Forward erasure probability.
        #[arg(long)]
        alpha: f64,
        /// Acknowledgment erasure probability.
        #[arg(long)]
        p: f64,
        /// Payload size in bits; a multiple of m-1.
        #[arg(long)]
        n_bits: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_rounds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `argv` and run the requested subcommand, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_BAD_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    let started = std::time::Instant::now();
    let (report, out, csv) = match dispatch(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BAD_INPUT;
        }
    };
    let code = match emit(&report, out.as_deref(), csv.as_deref()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_BAD_INPUT
        }
    };
    eprintln!("elapsed_ms: {}", started.elapsed().as_millis());
    code
}

fn dispatch(command: Command) -> Result<(InfoReport, Option<PathBuf>, Option<PathBuf>)> {
    match command {
        Command::Analyze {
            system,
            out,
            csv,
            tol,
        } => Ok((analyze_report(&system, tol)?, out, csv)),
        Command::Verify {
            trials,
            seed,
            tol,
            out,
            csv,
        } => Ok((verify_report(trials, seed, tol)?, out, csv)),
        Command::Bounds {
            system,
            n,
            restarts,
            grid,
            seed,
            out,
        } => Ok((bounds_report(&system, n, restarts, grid, seed)?, out, None)),
        Command::Codefn {
            system,
            dump,
            tol,
            out,
        } => Ok((codefn_report(&system, dump, tol)?, out, None)),
        Command::Bcec {
            m,
            alpha,
            p,
            n_bits,
            seed,
            max_rounds,
            out,
        } => Ok((
            bcec_report(m, alpha, p, n_bits, seed, max_rounds)?,
            out,
            None,
        )),
    }
}

fn emit(report: &InfoReport, out: Option<&Path>, csv: Option<&Path>) -> Result<i32> {
    let json = report.to_json_string()?;
    match out {
        Some(path) => std::fs::write(path, &json).map_err(|e| {
            Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
        })?,
        None => print!("{json}"),
    }
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv_string()).map_err(|e| {
            Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
        })?;
    }
    if report.all_checks_pass() {
        Ok(EXIT_PASS)
    } else {
        for check in report.failed_checks() {
            eprintln!(
                "check failed: {}: {} (lhs={}, rhs={}, residual={}, tol={})",
                check.name,
                check.identity,
                check.lhs_bits,
                check.rhs_bits,
                check.residual_bits,
                check.tolerance
            );
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

/// The same system cut down to its first `m` steps.
fn truncate_parts(parts: &SystemParts, m: usize) -> Result<SystemParts> {
    let cut = |k: &Kernel| Kernel::new(k.role(), k.shape(), k.tables()[..m].to_vec());
    let encoder = match &parts.encoder {
        Some(enc) => {
            let functions = enc
                .functions()
                .iter()
                .map(|f| CodeFunction::new(f.x_size(), f.z_size(), f.tables()[..m].to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Some(MessageEncoder::new(functions)?)
        }
        None => None,
    };
    Ok(SystemParts {
        n: m,
        shape: parts.shape,
        channel: cut(&parts.channel)?,
        feedback: cut(&parts.feedback)?,
        policy: match &parts.policy {
            Some(k) => Some(cut(k)?),
            None => None,
        },
        encoder,
        prior: parts.prior.clone(),
    })
}

/// Full measure set for one joint; `message` selects the encoder-route rows.
fn joint_measures(joint: &JointTable, message: bool) -> Result<Vec<(String, f64)>> {
    let layout = joint.layout();
    let n = layout.horizon("Y");
    let xg = layout.time_group("X", n)?;
    let yg = layout.time_group("Y", n)?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    if message {
        let w = layout.index_of("W")?;
        rows.push(("H(W)".into(), entropy(joint, &[w])));
        rows.push(("H(X^n)".into(), entropy(joint, &xg)));
        rows.push(("H(Y^n)".into(), entropy(joint, &yg)));
        rows.push((
            "I(X^n;Y^n)".into(),
            mutual_information(joint, &xg, &yg, &[])?,
        ));
        rows.push(("I(X^n->Y^n)".into(), directed_information(joint, "X", "Y")?));
        rows.push((
            "I(X^n->Y^n||Z^n)".into(),
            causal_conditional_directed_information(joint, "X", "Y", "Z")?,
        ));
        rows.push((
            "Idelay(Z^{n-1}->Y^n)".into(),
            delayed_directed_information(joint, "Z", "Y")?,
        ));
        rows.push((
            "I(W;Y^n)".into(),
            mutual_information(joint, &[w], &yg, &[])?,
        ));
        let rdi = residual_directed_information(joint, "X", "Y", "W")?;
        rows.push(("I(X^n->Y^n|W)".into(), rdi.conditioned_bits));
        rows.push(("IR(X^n->Y^n;W)".into(), rdi.value_bits));
    } else {
        rows.push(("H(X^n)".into(), entropy(joint, &xg)));
        rows.push(("H(Y^n)".into(), entropy(joint, &yg)));
        rows.push((
            "I(X^n;Y^n)".into(),
            mutual_information(joint, &xg, &yg, &[])?,
        ));
        rows.push(("I(X^n->Y^n)".into(), directed_information(joint, "X", "Y")?));
        rows.push((
            "I(X^n->Y^n||Z^n)".into(),
            causal_conditional_directed_information(joint, "X", "Y", "Z")?,
        ));
        rows.push((
            "Idelay(Z^{n-1}->Y^n)".into(),
            delayed_directed_information(joint, "Z", "Y")?,
        ));
    }
    rows.push((
        "feedback_link_typicality".into(),
        feedback_typicality(joint)?.value_bits,
    ));
    rows.push((
        "encoder_closed_loop_flow".into(),
        encoder_typicality(joint)?.closed_loop_value_bits,
    ));
    Ok(rows)
}

fn analyze_report(system: &Path, tol: f64) -> Result<InfoReport> {
    let spec = SystemSpec::from_file(system)?;
    let parts = spec.build()?;
    let caps = Caps::default();
    let mut report = InfoReport::new(
        format!("analyze --system {} --tol {tol}", system.display()),
        tol,
    );
    report.system = Some(spec.clone());
    report.feedback_link = Some(classify_feedback_noisy(&parts.channel, &parts.feedback)?);

    let message = parts.encoder.is_some();
    if !message && parts.policy.is_none() {
        return Err(Error::InvalidSystem(
            "analyze needs a policy or an encoder in the system spec".into(),
        ));
    }
    if message && parts.policy.is_some() {
        report.note("system declares both an encoder and a policy; measures use the encoder");
    }

    // Per-horizon series: measures at every prefix of the system.
    for m in 1..parts.n {
        let prefix = truncate_parts(&parts, m)?;
        let joint = if message {
            prefix.message_joint(&caps)?
        } else {
            prefix.policy_joint(&caps)?
        };
        for (name, value) in joint_measures(&joint, message)? {
            report.push_measure(m, name, value);
        }
    }
    let joint = if message {
        parts.message_joint(&caps)?
    } else {
        parts.policy_joint(&caps)?
    };
    for (name, value) in joint_measures(&joint, message)? {
        report.push_measure(parts.n, name, value);
    }

    if message {
        let (identity, rdi) = verify_message_information_identity(&joint, "W")?;
        report.checks.push(CheckRow::from_identity(&identity, tol));
        report.checks.push(CheckRow::equality(
            "conditioning_route_agreement",
            "I(X^n->Y^n|W) stepwise = I(X^n->Y^n|W) sliced",
            rdi.conditioned_bits,
            rdi.conditioned_bits_by_slicing,
            tol,
        ));
        let chain = ordering_chain(&joint, "W")?;
        report.checks.push(CheckRow {
            name: "information_ordering_chain".into(),
            identity: ORDERING_IDENTITY.into(),
            lhs_bits: chain.mutual_bits,
            rhs_bits: chain.residual_bits,
            residual_bits: chain.max_violation_bits,
            tolerance: tol,
            pass: chain.max_violation_bits <= tol,
        });
        let flow = verify_feedback_flow_identity(&joint, "W")?;
        report.checks.push(CheckRow::from_identity(&flow, tol));
        match rate_loss_bound(&joint, &parts.channel, "W") {
            Ok(loss) => {
                report.push_measure(
                    parts.n,
                    "single_letter_capacity",
                    loss.capacity_bits_per_use,
                );
                report.checks.push(CheckRow::at_least(
                    "rate_loss_bound",
                    "n C - I(W;Y^n) >= I(X^n->Y^n|W)",
                    loss.gap_bits,
                    loss.floor_bits,
                    tol,
                ));
            }
            Err(Error::NotMemoryless) => {
                report.note("channel is not memoryless; rate-loss bound not applicable");
            }
            Err(e) => return Err(e),
        }
        if let Some(noise) = parts.feedback.additive_noise_decomposition() {
            let encoder = parts.encoder.as_ref().expect("message route");
            let prior = parts.prior.as_ref().expect("prior defaults with encoder");
            let joint_v = build_joint_wxyvz(encoder, prior, &parts.channel, &noise, &caps)?;
            let flows = decompose_flows(&joint_v, "W")?;
            report.checks.push(CheckRow::equality(
                "flow_decomposition",
                "I(X^n->Y^n) = I(W;Y^n) + I(V^{n-1};Y^n) + I(W;V^{n-1}|Y^n)",
                flows.total_bits,
                flows.message_bits + flows.noise_bits + flows.mixed_bits,
                tol,
            ));
            let class = encoder_typicality(&joint_v)?;
            if let (Some(noise_flow), Some(_)) =
                (class.noise_flow_bits, class.equivalence_residual_bits)
            {
                report.checks.push(CheckRow::equality(
                    "closed_loop_flow_routes",
                    "(1/n) sum_i I(Z^{i-1};Y_i|Y^{i-1}) = (1/n) I(V^{n-1};Y^n)",
                    class.closed_loop_value_bits,
                    noise_flow,
                    tol,
                ));
            }
        }
    }
    report.note(FINITE_HORIZON_SCOPE_NOTE);
    Ok(report)
}

fn verify_report(trials: usize, seed: u64, tol: f64) -> Result<InfoReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let mut report = InfoReport::new(
        format!("verify --trials {trials} --seed {seed} --tol {tol}"),
        tol,
    );
    report.seed = Some(seed);
    let caps = Caps::default();
    let shape = SystemShape::new(2, 2, 2)?;
    let round_trip_tol = tol / 10.0;
    let density_tol = tol * 10.0;
    let mut root = SplitMix64::new(seed);

    for trial in 0..trials {
        let mut rng = root.split();
        let n = 1 + rng.next_below(3);
        let messages = if rng.next_below(2) == 0 { 2 } else { 4 };
        let channel = sampling::random_channel(&mut rng, n, shape);
        let feedback = sampling::random_feedback(&mut rng, n, shape);
        let encoder = sampling::random_encoder(&mut rng, n, messages, shape);
        let prior = vec![1.0 / messages as f64; messages];
        let joint = build_joint_wxyz(&encoder, &prior, &channel, &feedback, &caps)?;
        let tag = |name: &str| format!("t{trial:03}_{name}");

        let (identity, rdi) = verify_message_information_identity(&joint, "W")?;
        let mut row = CheckRow::from_identity(&identity, tol);
        row.name = tag(&row.name);
        report.checks.push(row);

        report.checks.push(CheckRow::equality(
            &tag("conditioning_route_agreement"),
            "I(X^n->Y^n|W) stepwise = I(X^n->Y^n|W) sliced",
            rdi.conditioned_bits,
            rdi.conditioned_bits_by_slicing,
            tol,
        ));

        let chain = ordering_chain(&joint, "W")?;
        report.checks.push(CheckRow {
            name: tag("information_ordering_chain"),
            identity: ORDERING_IDENTITY.into(),
            lhs_bits: chain.mutual_bits,
            rhs_bits: chain.residual_bits,
            residual_bits: chain.max_violation_bits,
            tolerance: tol,
            pass: chain.max_violation_bits <= tol,
        });

        let flow = verify_feedback_flow_identity(&joint, "W")?;
        let mut row = CheckRow::from_identity(&flow, tol);
        row.name = tag(&row.name);
        report.checks.push(row);

        // Perfect feedback collapses the residual onto the full directed
        // information: the encoder adds no randomness of its own.
        let perfect = Kernel::perfect_feedback(n, shape)?;
        let joint_p = build_joint_wxyz(&encoder, &prior, &channel, &perfect, &caps)?;
        let rdi_p = residual_directed_information(&joint_p, "X", "Y", "W")?;
        report.checks.push(CheckRow::equality(
            &tag("perfect_feedback_collapse"),
            "IR(X^n->Y^n;W) = I(X^n->Y^n) under perfect feedback",
            rdi_p.value_bits,
            rdi_p.directed_bits,
            tol,
        ));

        // Feedback-free inputs: directed collapses onto mutual information,
        // and the delayed feedback-to-output flow vanishes identically.
        let open = sampling::open_loop_encoder(&mut rng, n, messages, shape);
        let joint_o = build_joint_wxyz(&open, &prior, &channel, &feedback, &caps)?;
        let layout_o = joint_o.layout();
        let mi_o = mutual_information(
            &joint_o,
            &layout_o.time_group("X", n)?,
            &layout_o.time_group("Y", n)?,
            &[],
        )?;
        report.checks.push(CheckRow::equality(
            &tag("open_loop_directed_equals_mutual"),
            "I(X^n->Y^n) = I(X^n;Y^n) for feedback-free inputs",
            directed_information(&joint_o, "X", "Y")?,
            mi_o,
            tol,
        ));
        report.checks.push(CheckRow::equality(
            &tag("open_loop_feedback_flow_zero"),
            "Idelay(Z^{n-1}->Y^n) = 0 for feedback-free inputs",
            delayed_directed_information(&joint_o, "Z", "Y")?,
            0.0,
            tol,
        ));

        // Additive-feedback variant of the trial: the directed information
        // splits into message, noise and entangled flows.
        let beta = 0.05 + 0.4 * rng.next_f64();
        let noise = NoiseProcess::binary_flip(n, beta)?;
        let enc_a = sampling::random_encoder(&mut rng, n, messages, shape);
        let joint_a = build_joint_wxyvz(&enc_a, &prior, &channel, &noise, &caps)?;
        let flows = decompose_flows(&joint_a, "W")?;
        report.checks.push(CheckRow::equality(
            &tag("flow_decomposition"),
            "I(X^n->Y^n) = I(W;Y^n) + I(V^{n-1};Y^n) + I(W;V^{n-1}|Y^n)",
            flows.total_bits,
            flows.message_bits + flows.noise_bits + flows.mixed_bits,
            tol,
        ));

        // Code-function suite at n = 2.
        let policy = sampling::random_policy(&mut rng, 2, shape);
        let ch2 = sampling::random_channel(&mut rng, 2, shape);
        let fb2 = sampling::random_feedback(&mut rng, 2, shape);
        let dist = good_distribution_from_policy(&policy, &caps)?;
        let joint_f = build_joint_fxyz(&dist, &ch2, &fb2, &caps)?;
        let induced = induced_policy(&joint_f)?;
        report.checks.push(CheckRow::equality(
            &tag("induced_policy_round_trip"),
            "induced p(x_i|x^{i-1},z^{i-1}) matches the generating policy",
            induced.max_deviation(&policy)?,
            0.0,
            round_trip_tol,
        ));
        let density = verify_density_equality(&joint_f)?;
        report.checks.push(CheckRow::equality(
            &tag("pointwise_density_equality"),
            "i(F^n;Y^n) = i(X^n->Y^n) - i(X^n->Y^n||F^n) pointwise on the support",
            density.max_abs_residual,
            0.0,
            density_tol,
        ));
        let decomp = verify_codefn_information_decomposition(&joint_f)?;
        report.checks.push(CheckRow::equality(
            &tag("codefn_information_decomposition"),
            "I(F^n;Y^n) = I(X^n->Y^n||Z^n) - I(F^n;Z^n|Y^n)",
            decomp.mutual_information_bits,
            decomp.causal_conditioned_bits - decomp.leaked_bits,
            tol,
        ));
    }

    report.note(FINITE_HORIZON_SCOPE_NOTE);
    report.note(format!(
        "{trials} trials, 11 checks each; round-trip rows use tol/10, pointwise density rows tol*10"
    ));
    Ok(report)
}

fn bounds_report(
    system: &Path,
    n_override: Option<usize>,
    restarts: Option<usize>,
    grid: Option<usize>,
    seed: u64,
) -> Result<InfoReport> {
    let spec = SystemSpec::from_file(system)?;
    let parts = spec.build()?;
    let caps = Caps::default();
    let (channel, feedback) = match n_override {
        Some(n) => extend_links(&parts.channel, &parts.feedback, n)?,
        None => (parts.channel.clone(), parts.feedback.clone()),
    };
    let n = channel.horizon();

    let defaults = OptimizerConfig::default();
    let cfg = OptimizerConfig {
        restarts: restarts.unwrap_or(defaults.restarts),
        grid_resolution: grid.unwrap_or(defaults.grid_resolution),
        seed,
        ..defaults
    };
    let mut report = InfoReport::new(
        format!(
            "bounds --system {} --n {n} --restarts {} --grid {} --seed {seed}",
            system.display(),
            cfg.restarts,
            cfg.grid_resolution
        ),
        1e-6,
    );
    report.seed = Some(seed);

    let result = optimize_upper_bound(&channel, &feedback, &cfg, &caps)?;
    report.push_measure(n, "upper_bound_bits_per_use", result.upper_bits_per_use);

    // How hard the maximizing policy leans on the feedback link.
    let argmax_joint =
        crate::joint::build_joint_xyz(&result.argmax_policy, &channel, &feedback, &caps)?;
    let argmax_flow = encoder_typicality(&argmax_joint)?;
    report.push_measure(
        n,
        "argmax_closed_loop_flow",
        argmax_flow.closed_loop_value_bits,
    );

    let single_letter = match channel.memoryless_matrix() {
        Some(matrix) => {
            let (capacity, _) = single_letter_capacity(&matrix)?;
            report.push_measure(n, "single_letter_capacity", capacity);
            Some(capacity)
        }
        None => None,
    };
    if let Some(lower) = &result.lower {
        report.push_measure(n, "lower_bound_bits_per_use", lower.value_bits_per_use);
        report.push_measure(
            n,
            "feedback_noise_entropy_per_symbol",
            lower.noise_entropy_bits_per_symbol,
        );
    }

    report.bounds = Some(BoundsSection {
        horizon: n,
        upper_bits_per_use: result.upper_bits_per_use,
        tolerance: 1e-6,
        method: result.method.clone(),
        evaluations: result.evaluations,
        restarts_used: result.restarts_used,
        trace: result.trace.clone(),
        lower: result.lower.as_ref().map(|l| LowerBoundRow {
            value_bits_per_use: l.value_bits_per_use,
            noise_entropy_bits_per_symbol: l.noise_entropy_bits_per_symbol,
            clamped: l.clamped,
            tolerance: 1e-6,
        }),
        single_letter_capacity_bits: single_letter,
        argmax_policy: result.argmax_policy.tables().to_vec(),
    });

    // Echo a system file that reproduces the reported value under `analyze`.
    let echoed = SystemParts {
        n,
        shape: channel.shape(),
        channel: channel.clone(),
        feedback: feedback.clone(),
        policy: Some(result.argmax_policy.clone()),
        encoder: None,
        prior: None,
    };
    report.system = Some(SystemSpec::from_parts(&echoed));
    if n_override.is_some() && n != parts.n {
        report.note(format!(
            "horizon override: links extended from n = {} to n = {n}",
            parts.n
        ));
    }
    report.note(FINITE_HORIZON_SCOPE_NOTE);
    report.note("the reported upper bound is the best value found by the configured search");
    Ok(report)
}

fn codefn_report(system: &Path, dump: bool, tol: f64) -> Result<InfoReport> {
    let spec = SystemSpec::from_file(system)?;
    let parts = spec.build()?;
    let policy = parts
        .policy
        .as_ref()
        .ok_or_else(|| Error::InvalidSystem("codefn needs a policy in the system spec".into()))?;
    let caps = Caps::default();
    let n = parts.n;
    let shape = parts.shape;
    let mut report = InfoReport::new(
        format!(
            "codefn --system {}{} --tol {tol}",
            system.display(),
            if dump { " --dump" } else { "" }
        ),
        tol,
    );
    report.system = Some(spec.clone());

    let mut maps_per_time = Vec::with_capacity(n);
    for t in 0..n {
        let count = CodeFunction::time_map_count(shape.x, shape.z, t).ok_or_else(|| {
            Error::CapExceeded(format!("code-function count overflows at time {}", t + 1))
        })?;
        maps_per_time.push(count as u64);
    }
    let sequence_count = CodeFunction::sequence_count(n, shape.x, shape.z)
        .and_then(|c| u64::try_from(c).ok())
        .ok_or_else(|| Error::CapExceeded("code-function count overflows".into()))?;

    let functions = enumerate_code_functions(n, shape.x, shape.z, &caps)?;
    report.checks.push(CheckRow::exact(
        "code_function_count",
        "enumeration size = prod_i |X|^(|Z|^(i-1))",
        functions.len() as u64 == sequence_count,
    ));

    let dist = good_distribution_from_policy(policy, &caps)?;
    let joint = build_joint_fxyz(&dist, &parts.channel, &parts.feedback, &caps)?;

    let induced = induced_policy(&joint)?;
    report.checks.push(CheckRow::equality(
        "induced_policy_round_trip",
        "induced p(x_i|x^{i-1},z^{i-1}) matches the generating policy",
        induced.max_deviation(policy)?,
        0.0,
        tol / 10.0,
    ));

    let density_check = verify_density_equality(&joint)?;
    report.checks.push(CheckRow::equality(
        "pointwise_density_equality",
        "i(F^n;Y^n) = i(X^n->Y^n) - i(X^n->Y^n||F^n) pointwise on the support",
        density_check.max_abs_residual,
        0.0,
        tol * 10.0,
    ));
    report.checks.push(CheckRow::equality(
        "density_mean_is_mutual_information",
        "E[i(F^n;Y^n) residual density] = I(F^n;Y^n)",
        density_check.mean_residual_density_bits,
        density_check.mutual_information_bits,
        tol,
    ));

    let decomp = verify_codefn_information_decomposition(&joint)?;
    report.checks.push(CheckRow::equality(
        "codefn_information_decomposition",
        "I(F^n;Y^n) = I(X^n->Y^n||Z^n) - I(F^n;Z^n|Y^n)",
        decomp.mutual_information_bits,
        decomp.causal_conditioned_bits - decomp.leaked_bits,
        tol,
    ));

    report.push_measure(n, "I(F^n;Y^n)", decomp.mutual_information_bits);
    report.push_measure(n, "I(X^n->Y^n||Z^n)", decomp.causal_conditioned_bits);
    report.push_measure(n, "I(F^n;Z^n|Y^n)", decomp.leaked_bits);

    let density = residual_density_table(&joint)?;
    let mut quantiles = Vec::with_capacity(DEFAULT_RESIDUAL_QUANTILES.len());
    for &q in DEFAULT_RESIDUAL_QUANTILES.iter() {
        quantiles.push((q, density.quantile(q)? / n as f64));
    }
    report.codefn = Some(CodefnSection {
        horizon: n,
        maps_per_time,
        sequence_count,
        density_quantiles_per_symbol: quantiles,
        density_mean_bits: density.mean_bits(),
        dump: dump.then(|| {
            functions
                .iter()
                .map(|f| f.tables().to_vec())
                .collect::<Vec<_>>()
        }),
    });
    report.note(FINITE_HORIZON_SCOPE_NOTE);
    Ok(report)
}

fn bcec_report(
    m: usize,
    alpha: f64,
    p: f64,
    n_bits: usize,
    seed: u64,
    max_rounds: u64,
) -> Result<InfoReport> {
    let cfg = BcecConfig {
        m,
        alpha,
        p,
        n_bits,
        seed,
        max_rounds,
    };
    cfg.validate()?;
    let mut report = InfoReport::new(
        format!(
            "bcec --m {m} --alpha {alpha} --p {p} --n-bits {n_bits} --seed {seed} --max-rounds {max_rounds}"
        ),
        1e-12,
    );
    report.seed = Some(seed);

    let result = simulate_bcec(&cfg)?;
    let se = empirical_rate_standard_error(&result);
    report.push_measure(m, "bcec_analytic_rate", result.analytic_rate);
    report.push_measure(m, "bcec_empirical_rate", result.empirical_rate);
    report.push_measure(m, "bcec_capacity", result.capacity_bits_per_use);
    report.push_measure(m, "bcec_empirical_ratio", result.empirical_ratio);

    report.checks.push(CheckRow::exact(
        "exact_decoding",
        "received payload = sent payload with no round-cap hit",
        result.decoded_correctly && !result.cap_hit,
    ));
    report.checks.push(CheckRow::equality(
        "monte_carlo_rate",
        "n_bits / channel_uses = (m-1)(1-alpha)(1-p) within 3 standard errors",
        result.empirical_rate,
        result.analytic_rate,
        3.0 * se,
    ));
    report.checks.push(CheckRow::equality(
        "capacity_ratio",
        "empirical rate / capacity = (1-p)(1-1/m) within 3 standard errors",
        result.empirical_ratio,
        result.ratio_to_capacity,
        3.0 * se / result.capacity_bits_per_use,
    ));

    report.bcec = Some(BcecSection {
        result,
        rate_standard_error: se,
    });
    report.note(BCEC_ACCOUNTING_NOTE);
    report.note(FINITE_HORIZON_SCOPE_NOTE);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("fbflow-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn bsc_system_file(name: &str) -> PathBuf {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let parts = SystemParts {
            n: 2,
            shape,
            channel: Kernel::bsc_channel(2, 0.1).unwrap(),
            feedback: Kernel::perfect_feedback(2, shape).unwrap(),
            policy: Some(Kernel::uniform_policy(2, shape).unwrap()),
            encoder: None,
            prior: None,
        };
        let path = scratch(name);
        let spec = SystemSpec::from_parts(&parts);
        std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
        path
    }

    #[test]
    fn unknown_subcommand_is_bad_input() {
        assert_eq!(run(["fbflow", "frobnicate"]), EXIT_BAD_INPUT);
        assert_eq!(run(["fbflow", "analyze", "--no-such-flag"]), EXIT_BAD_INPUT);
    }

    #[test]
    fn help_exits_clean() {
        assert_eq!(run(["fbflow", "--help"]), EXIT_PASS);
    }

    #[test]
    fn analyze_policy_system_passes() {
        let path = bsc_system_file("analyze.json");
        let out = scratch("analyze_report.json");
        let csv = scratch("analyze_series.csv");
        let code = run([
            "fbflow".into(),
            "analyze".to_string(),
            "--system".into(),
            path.display().to_string(),
            "--out".into(),
            out.display().to_string(),
            "--csv".into(),
            csv.display().to_string(),
        ]);
        assert_eq!(code, EXIT_PASS);
        let report = InfoReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(report.feedback_link.is_some());
        assert!(!report.feedback_link.unwrap().noisy);
        let di = report
            .measures
            .iter()
            .find(|r| r.n == 2 && r.name == "I(X^n->Y^n)")
            .unwrap();
        assert!((di.value_bits - 1.0620088128214377).abs() < 1e-9);
        let csv_text = std::fs::read_to_string(&csv).unwrap();
        assert!(csv_text.starts_with("n,measure_name,value_bits\n"));
        assert!(csv_text.contains("\n1,I(X^n->Y^n),"));
    }

    #[test]
    fn analyze_missing_row_is_bad_input_naming_the_history() {
        let path = bsc_system_file("broken.json");
        let mut spec: SystemSpec =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        spec.channel[1].pop();
        std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
        let code = run(["fbflow", "analyze", "--system", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_BAD_INPUT);
    }

    #[test]
    fn verify_short_run_passes_and_is_deterministic() {
        let out_a = scratch("verify_a.json");
        let out_b = scratch("verify_b.json");
        for out in [&out_a, &out_b] {
            let code = run([
                "fbflow",
                "verify",
                "--trials",
                "2",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_PASS);
        }
        let a = std::fs::read(&out_a).unwrap();
        let b = std::fs::read(&out_b).unwrap();
        assert_eq!(a, b, "reports must be byte-identical");
        let report = InfoReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
        assert_eq!(report.checks.len(), 2 * 11);
        assert!(report.all_checks_pass());
    }

    #[test]
    fn bounds_on_a_small_bsc_reaches_capacity() {
        let shape = SystemShape::new(2, 2, 2).unwrap();
        let parts = SystemParts {
            n: 1,
            shape,
            channel: Kernel::bsc_channel(1, 0.1).unwrap(),
            feedback: Kernel::perfect_feedback(1, shape).unwrap(),
            policy: None,
            encoder: None,
            prior: None,
        };
        let path = scratch("bsc1.json");
        std::fs::write(
            &path,
            serde_json::to_string(&SystemSpec::from_parts(&parts)).unwrap(),
        )
        .unwrap();
        let out = scratch("bounds_report.json");
        let code = run([
            "fbflow",
            "bounds",
            "--system",
            path.to_str().unwrap(),
            "--grid",
            "8",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
        let report = InfoReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let bounds = report.bounds.unwrap();
        assert!((bounds.upper_bits_per_use - 0.5310044064107188).abs() < 1e-6);
        assert_eq!(bounds.argmax_policy.len(), 1);
        // The echoed system must re-analyze cleanly.
        let echoed = report.system.unwrap();
        assert!(echoed.policy.is_some());
        echoed.build().unwrap();
    }

    #[test]
    fn codefn_report_carries_counts_and_checks() {
        let path = bsc_system_file("codefn.json");
        let out = scratch("codefn_report.json");
        let code = run([
            "fbflow",
            "codefn",
            "--system",
            path.to_str().unwrap(),
            "--dump",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
        let report = InfoReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let section = report.codefn.unwrap();
        assert_eq!(section.maps_per_time, vec![2, 4]);
        assert_eq!(section.sequence_count, 8);
        assert_eq!(section.dump.unwrap().len(), 8);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "induced_policy_round_trip"));
    }

    #[test]
    fn bcec_reference_point_passes() {
        let out = scratch("bcec_report.json");
        let code = run([
            "fbflow",
            "bcec",
            "--m",
            "10",
            "--alpha",
            "0.2",
            "--p",
            "0.1",
            "--n-bits",
            "9000",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
        let report = InfoReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let section = report.bcec.unwrap();
        assert!(section.result.decoded_correctly);
        assert!((section.result.analytic_rate - 6.48).abs() < 1e-12);
        assert!(report.notes.iter().any(|n| n.contains("BCEC accounting")));
    }

    #[test]
    fn bcec_bad_params_are_bad_input() {
        assert_eq!(
            run(["fbflow", "bcec", "--m", "1", "--alpha", "0.2", "--p", "0.1", "--n-bits", "90"]),
            EXIT_BAD_INPUT
        );
        assert_eq!(
            run(["fbflow", "bcec", "--m", "10", "--alpha", "1.0", "--p", "0.1", "--n-bits", "90"]),
            EXIT_BAD_INPUT
        );
    }
}
