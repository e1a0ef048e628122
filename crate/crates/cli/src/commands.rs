use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use qgamble_core::equilibrium::{alice_best_response, bob_guarantee, sweep_r, RestrictedStrategy, SearchOptions};
use qgamble_core::fluxmodel::{build_hamiltonian, evolve, reduce_two_level, RingDoc};
use qgamble_core::protocol::document::StrategyDocument;
use qgamble_core::protocol::{
    bob_rotation, expected_payoff, shard_rng, simulate, uniform_draw, AliceStrategy, BobStrategy, GameRules,
    PreparedGame,
};
use qgamble_core::synth::{self, Circuit};
use qgamble_core::Error;

use crate::report::{Field, Report};
use crate::{AliceArgs, BobArgs, Command, Format, JobsArgs, OutputArgs, RulesArgs, SearchArgs};

/// How a command that produced output finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    /// Output written, but a search or check did not meet its tolerance.
    NotConverged,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Done => 0,
            Status::NotConverged => 3,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Io(io::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 4,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<Status, Failure>;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn input(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Payoff { alice, bob, rules, out } => payoff(alice, bob, rules, out),
        Command::Play { alice, bob, rules, rounds, seed, jobs, interactive, out } => {
            let game = Game::resolve(&alice, &bob, &rules)?;
            if interactive {
                play_interactive(&game, rounds, seed.seed)
            } else {
                with_jobs(&jobs, || play(&game, rounds, seed.seed, &out))
            }
        }
        Command::Optimize { bob, rules, search, jobs, out } => with_jobs(&jobs, || optimize(&bob, &rules, &search, &out)),
        Command::Sweep { r_values, search, jobs, out } => with_jobs(&jobs, || sweep(&r_values, &search, &out)),
        Command::Decompose { alice, bob, out } => decompose(&alice, &bob, &out),
        Command::Flux { spec, gap_ratio, t, out } => flux(&spec, gap_ratio, &t, &out),
    }
}

fn with_jobs(jobs: &JobsArgs, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.jobs)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} worker threads: {e}", jobs.jobs)))?;
    pool.install(f)
}

fn load_document(path: &Path) -> Result<StrategyDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    StrategyDocument::from_json(&text).map_err(input(path))
}

/// Strategy pair and rules assembled from flags and an optional document.
struct Game {
    alice: AliceStrategy<f64>,
    bob: BobStrategy<f64>,
    rules: GameRules<f64>,
}

impl Game {
    fn resolve(a: &AliceArgs, b: &BobArgs, r: &RulesArgs) -> Result<Self, Failure> {
        let doc = a.strategies.as_deref().map(load_document).transpose()?;
        let alice = resolve_alice(a, doc.as_ref())?
            .ok_or_else(|| Failure::Usage("no Alice strategy: pass --honest, --eta or --strategies".into()))?;
        let bob = resolve_bob(b, doc.as_ref(), a.strategies.as_deref())?
            .ok_or_else(|| Failure::Usage("no rotation angle: pass --theta or --s".into()))?;
        let rules = match (r.r, doc.as_ref().and_then(|d| d.rules.as_ref())) {
            (Some(prize), _) => GameRules::new(prize).map_err(usage)?,
            (None, Some(rules)) => rules.to_rules().map_err(input(a.strategies.as_deref().unwrap()))?,
            (None, None) => return Err(Failure::Usage("no prize: pass --R".into())),
        };
        Ok(Self { alice, bob, rules })
    }
}

fn resolve_alice(a: &AliceArgs, doc: Option<&StrategyDocument>) -> Result<Option<AliceStrategy<f64>>, Failure> {
    if a.honest {
        return Ok(Some(AliceStrategy::honest()));
    }
    if let Some(eta) = a.eta {
        return AliceStrategy::from_eta(eta).map(Some).map_err(usage);
    }
    match (doc.and_then(|d| d.alice.as_ref()), a.strategies.as_deref()) {
        (Some(alice), Some(path)) => alice.to_strategy().map(Some).map_err(input(path)),
        _ => Ok(None),
    }
}

fn resolve_bob(b: &BobArgs, doc: Option<&StrategyDocument>, path: Option<&Path>) -> Result<Option<BobStrategy<f64>>, Failure> {
    if let Some(theta) = b.theta {
        return BobStrategy::new(theta).map(Some).map_err(usage);
    }
    if let Some(s) = b.s {
        return BobStrategy::from_s(s).map(Some).map_err(usage);
    }
    match (doc.and_then(|d| d.bob.as_ref()), path) {
        (Some(bob), Some(path)) => bob.to_strategy().map(Some).map_err(input(path)),
        _ => Ok(None),
    }
}

fn emit(report: &Report, out: &OutputArgs, default: Format) -> io::Result<()> {
    let mut sink = open_sink(out.out.as_deref())?;
    match out.format.unwrap_or(default) {
        Format::Json => writeln!(sink, "{}", report.to_json())?,
        Format::Csv => report.write_csv(&mut sink)?,
        Format::Text => report.write_text(&mut sink)?,
    }
    sink.flush()
}

fn open_sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn amplitudes(a: &AliceStrategy<f64>) -> Report {
    let pair = |z: qgamble_core::C<f64>| Field::List(vec![Field::Num(z.re), Field::Num(z.im)]);
    Report::new()
        .with("alpha", pair(a.alpha))
        .with("beta", pair(a.beta))
        .with("gamma", pair(a.gamma))
        .with("delta", pair(a.delta))
}

fn game_header(g: &Game) -> Report {
    Report::new()
        .with("theta", g.bob.theta())
        .with("s", g.bob.s())
        .with("R", g.rules.r_prize)
}

fn payoff(a: AliceArgs, b: BobArgs, r: RulesArgs, out: OutputArgs) -> Outcome {
    let g = Game::resolve(&a, &b, &r)?;
    let p = expected_payoff(&g.alice, &g.bob, &g.rules).map_err(usage)?;
    let report = game_header(&g)
        .with("p_b1", p.p_b1)
        .with("p_pass", p.p_pass)
        .with("p_fail", p.p_fail)
        .with("expected_gain", p.expected_gain);
    emit(&report, &out, Format::Json)?;
    Ok(Status::Done)
}

fn play(g: &Game, rounds: u64, seed: u64, out: &OutputArgs) -> Outcome {
    eprintln!("qgamble: seed {seed}");
    let sim = simulate(&g.alice, &g.bob, &g.rules, rounds, seed).map_err(usage)?;
    let exact = expected_payoff(&g.alice, &g.bob, &g.rules).map_err(usage)?.expected_gain;
    let z = if sim.std_error > 0.0 { Some((sim.mean_payoff - exact) / sim.std_error) } else { None };
    let report = Report::new()
        .with("seed", seed)
        .with("rounds", rounds)
        .with("theta", g.bob.theta())
        .with("s", g.bob.s())
        .with("R", g.rules.r_prize)
        .with(
            "counts",
            Report::new()
                .with("b1", sim.counts.b1)
                .with("pass", sim.counts.pass)
                .with("fail", sim.counts.fail),
        )
        .with("mean_payoff", sim.mean_payoff)
        .with("std_error", sim.std_error)
        .with("expected_gain", exact)
        .with("z_score", z);
    emit(&report, out, Format::Json)?;
    Ok(Status::Done)
}

/// One round per line on stdin: empty line plays, `q` (or end of input) stops.
fn play_interactive(g: &Game, max_rounds: u64, seed: u64) -> Outcome {
    eprintln!("qgamble: seed {seed}");
    let game = PreparedGame::new(&g.alice, &g.bob, &g.rules).map_err(usage)?;
    let mut rng = shard_rng(seed, 0);
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut stdout = io::stdout().lock();
    let (mut played, mut total) = (0u64, 0.0);
    while played < max_rounds {
        eprint!("round {}: [enter] play, q quit > ", played + 1);
        io::stderr().flush()?;
        match lines.next().transpose()? {
            Some(line) if !line.trim().eq_ignore_ascii_case("q") => {}
            _ => break,
        }
        let o = game.round(|| uniform_draw(&mut rng)).map_err(usage)?;
        played += 1;
        total += o.payoff;
        let verification = serde_json::to_value(o.verification).expect("enum serializes");
        let line = Report::new()
            .with("round", played)
            .with("b_bit", o.b_bit as u64)
            .with("verification", verification.as_str().unwrap_or_default())
            .with("payoff", o.payoff)
            .with("total", total);
        writeln!(stdout, "{}", line.to_json())?;
        stdout.flush()?;
    }
    let mean = if played > 0 { Some(total / played as f64) } else { None };
    let summary = Report::new()
        .with("seed", seed)
        .with("rounds", played)
        .with("total_payoff", total)
        .with("mean_payoff", mean)
        .with("expected_gain", game.breakdown().expected_gain);
    writeln!(stdout, "{}", summary.to_json())?;
    Ok(Status::Done)
}

fn search_options(s: &SearchArgs) -> Result<SearchOptions<f64>, Failure> {
    if s.starts == 0 {
        return Err(Failure::Usage("--starts must be at least 1".into()));
    }
    if s.tolerance.is_nan() || s.tolerance <= 0.0 {
        return Err(Failure::Usage("--tolerance must be positive".into()));
    }
    Ok(SearchOptions { starts: s.starts, tolerance: s.tolerance, ..SearchOptions::default() })
}

fn status(converged: bool) -> Status {
    if converged {
        Status::Done
    } else {
        Status::NotConverged
    }
}

fn optimize(b: &BobArgs, r: &RulesArgs, s: &SearchArgs, out: &OutputArgs) -> Outcome {
    let opts = search_options(s)?;
    let prize = r.r.ok_or_else(|| Failure::Usage("no prize: pass --R".into()))?;
    let rules = GameRules::new(prize).map_err(usage)?;
    if let Some(bob) = resolve_bob(b, None, None)? {
        let br = alice_best_response(bob.theta(), &rules, &opts).map_err(usage)?;
        let report = Report::new()
            .with("theta", bob.theta())
            .with("s", bob.s())
            .with("R", prize)
            .with("value", br.value)
            .with("eta", RestrictedStrategy::nearest(&br.alice).eta)
            .with("alice", amplitudes(&br.alice))
            .with("evaluations", br.evaluations)
            .with("tolerance_achieved", br.tolerance_achieved)
            .with("converged", br.converged);
        emit(&report, out, Format::Json)?;
        return Ok(status(br.converged));
    }
    let eq = bob_guarantee(&rules, &opts).map_err(usage)?;
    let paper_g = -(2.0 / prize).sqrt();
    let report = Report::new()
        .with("R", prize)
        .with("theta_star", eq.theta_star)
        .with("s_star", eq.s_star)
        .with("guarantee", eq.guarantee)
        .with("paper_G", paper_g)
        .with("ratio", eq.guarantee / paper_g)
        .with("eta_star", eq.alice_worst.eta)
        .with("alice", amplitudes(&eq.alice_worst_full))
        .with("evaluations", eq.evaluations)
        .with("tolerance_achieved", eq.tolerance_achieved)
        .with("converged", eq.converged);
    emit(&report, out, Format::Json)?;
    Ok(status(eq.converged))
}

fn sweep(r_values: &[f64], s: &SearchArgs, out: &OutputArgs) -> Outcome {
    let opts = search_options(s)?;
    let mut rs = r_values.to_vec();
    rs.sort_by(f64::total_cmp);
    let base = GameRules::new(2.0).expect("default stakes");
    let sw = sweep_r(&rs, &base, &opts).map_err(usage)?;
    let converged = sw.rows.iter().all(|row| row.converged);
    let fit = Report::new().with("slope", sw.slope).with("intercept", sw.intercept);
    let mut sink = open_sink(out.out.as_deref())?;
    match out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut sink);
            csv.write_record(["R", "theta_star", "s_star", "guarantee", "paper_G", "ratio"])?;
            for row in &sw.rows {
                let cells = [row.r_prize, row.theta_star, row.s_star, row.guarantee, row.paper_g, row.ratio];
                csv.write_record(cells.map(crate::report::g12))?;
            }
            csv.flush()?;
            drop(csv);
            writeln!(sink, "{}", fit.to_json())?;
        }
        Format::Json => {
            let rows = sw
                .rows
                .iter()
                .map(|row| {
                    Field::Obj(
                        Report::new()
                            .with("R", row.r_prize)
                            .with("theta_star", row.theta_star)
                            .with("s_star", row.s_star)
                            .with("guarantee", row.guarantee)
                            .with("paper_G", row.paper_g)
                            .with("ratio", row.ratio)
                            .with("eta_star", row.eta_star)
                            .with("converged", row.converged),
                    )
                })
                .collect();
            let report = Report::new()
                .with("rows", Field::List(rows))
                .with("slope", sw.slope)
                .with("intercept", sw.intercept);
            writeln!(sink, "{}", report.to_json())?;
        }
        Format::Text => return Err(Failure::Usage("sweep writes csv or json".into())),
    }
    sink.flush()?;
    Ok(status(converged))
}

fn gate_list(c: &Circuit<f64>) -> Field {
    Field::List(
        c.ops()
            .iter()
            .map(|op| {
                let wires = Field::List(op.wires.iter().map(|&w| Field::from(w)).collect());
                let kind = serde_json::to_value(op.kind).expect("gate kind serializes");
                Field::Obj(
                    Report::new()
                        .with("kind", kind.as_str().unwrap_or_default())
                        .with("wires", wires)
                        .with("angle", op.angle),
                )
            })
            .collect(),
    )
}

fn decompose(a: &AliceArgs, b: &BobArgs, out: &OutputArgs) -> Outcome {
    let doc = a.strategies.as_deref().map(load_document).transpose()?;
    let bob = resolve_bob(b, None, None)?;
    let alice = resolve_alice(a, doc.as_ref())?;
    let (target, circuit, labels, check) = match (alice, bob) {
        (Some(_), Some(_)) => return Err(Failure::Usage("pass either a rotation angle or an Alice strategy".into())),
        (None, None) => match doc.as_ref().and_then(|d| d.bob.as_ref()) {
            Some(bob) => {
                let bob = bob.to_strategy::<f64>().map_err(input(a.strategies.as_deref().unwrap()))?;
                rotation(bob.theta())?
            }
            None => return Err(Failure::Usage("nothing to decompose: pass --theta, --s or an Alice strategy".into())),
        },
        (None, Some(bob)) => rotation(bob.theta())?,
        (Some(alice), None) => {
            let c = synth::synth_prep(&alice).map_err(usage)?;
            let check = synth::verify_state(&c, &synth::prep_target(&alice).map_err(usage)?).map_err(usage)?;
            ("preparation", c, ["A", "B"], check)
        }
    };
    let format = out.format.unwrap_or(Format::Json);
    if format == Format::Text {
        let mut sink = open_sink(out.out.as_deref())?;
        writeln!(sink, "{}", circuit.diagram(&labels))?;
        writeln!(sink, "{} gates, distance {}", circuit.len(), crate::report::g12(check.distance))?;
        sink.flush()?;
    } else {
        eprintln!("{}", circuit.diagram(&labels));
        let report = Report::new()
            .with("target", target)
            .with("wires", Field::List(labels.iter().map(|&l| Field::from(l)).collect()))
            .with("gates", gate_list(&circuit))
            .with("gate_count", circuit.len())
            .with("distance", check.distance)
            .with("verified", check.ok);
        emit(&report, out, Format::Json)?;
    }
    Ok(status(check.ok))
}

type Decomposition = (&'static str, Circuit<f64>, [&'static str; 2], synth::VerifyReport<f64>);

fn rotation(theta: f64) -> Result<Decomposition, Failure> {
    let c = synth::synth_u(theta).map_err(usage)?;
    let check = synth::verify_circuit(&c, &bob_rotation(theta).map_err(usage)?, true).map_err(usage)?;
    Ok(("rotation", c, ["B", "C"], check))
}

fn flux(path: &PathBuf, gap_ratio: f64, times: &[f64], out: &OutputArgs) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc = RingDoc::from_json(&text).map_err(input(path))?;
    let spec = doc.to_spec::<f64>().map_err(input(path))?;
    let h = build_hamiltonian(&spec);
    let red = reduce_two_level(&h, gap_ratio).map_err(input(path))?;
    let p = red.params;
    let nums = |xs: &[f64]| Field::List(xs.iter().map(|&x| Field::Num(x)).collect());
    let mut evolution = Vec::with_capacity(times.len());
    for &t in times {
        let u = evolve(&p, t, spec.hbar()).map_err(usage)?;
        evolution.push(Field::Obj(Report::new().with("t", t).with("p_flip", u.get(1, 0).norm_sqr())));
    }
    let report = Report::new()
        .with("levels", spec.levels())
        .with("hbar", spec.hbar())
        .with("epsilon", p.epsilon)
        .with("delta", p.delta)
        .with("trace_shift", p.trace_shift)
        .with("gauge_phase", red.gauge_phase)
        .with("gap_ratio", red.gap_ratio)
        .with("eigenvalues_full", nums(&h.eigenvalues()))
        .with("eigenvalues_reduced", nums(&p.eigenvalues()))
        .with("evolution", Field::List(evolution));
    emit(&report, out, Format::Json)?;
    Ok(Status::Done)
}
