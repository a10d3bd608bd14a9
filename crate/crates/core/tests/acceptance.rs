//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that every criterion reports even
//! when an earlier one fails. A criterion passes only if its check has no
//! failures and it finished inside its time budget. The process exits with
//! status 1 if any criterion fails.

use std::time::{Duration, Instant};

use verlinde::fixedpoint::SuiteSize;
use verlinde::selfcheck::{self, CheckOutcome, Grid};

const SEED: u64 = 2024;

struct Line {
    id: usize,
    title: &'static str,
    outcomes: Vec<CheckOutcome>,
    elapsed: Duration,
    budget: Duration,
}

impl Line {
    fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed) && self.elapsed <= self.budget
    }

    fn print(&self) {
        let cases: u64 = self.outcomes.iter().map(|o| o.cases).sum();
        let failures: u64 = self.outcomes.iter().map(|o| o.failures).sum();
        let timing = if self.elapsed <= self.budget { "" } else { " over budget" };
        println!(
            "{} {:>2}. {} ({} cases, {} failures, {:.2}s of {}s{})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            cases,
            failures,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            timing,
        );
        for o in self.outcomes.iter().filter(|o| !o.passed()) {
            println!("        {}: {} of {} failed", o.name, o.failures, o.cases);
            for n in &o.notes {
                println!("          {n}");
            }
        }
    }
}

fn timed(f: impl FnOnce() -> Vec<CheckOutcome>) -> (Vec<CheckOutcome>, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() {
    let grid = Grid::acceptance();
    let mut lines = Vec::new();
    let mut push = |id, title, (outcomes, elapsed): (Vec<CheckOutcome>, Duration), budget| {
        let line = Line { id, title, outcomes, elapsed, budget };
        line.print();
        lines.push(line);
    };

    push(1, "minimal levels of adjoint groups", timed(|| vec![selfcheck::check_level_table()]), secs(1));

    // the conjugacy-class path is evaluated in the same sweep, so criteria 2
    // and 12 both report the full sweep time
    let ((ints, dual), sweep_time) = {
        let start = Instant::now();
        let r = selfcheck::check_quotients(&grid);
        (r, start.elapsed())
    };
    push(2, "integrality over all subgroups, k <= 8, h <= 3", (vec![ints], sweep_time), secs(600));
    push(3, "two-holed sphere orthogonality", timed(|| vec![selfcheck::check_orthogonality(&grid)]), secs(60));
    push(4, "SU(2) sine-sum oracle, k <= 12, h <= 4, r <= 3", timed(|| vec![selfcheck::check_su2_oracle(12, 4, 3)]), secs(60));
    push(
        5,
        "PSU(p) reduction, p in {2, 3, 5}, k <= 4p, h <= 3",
        timed(|| vec![selfcheck::check_psu_p(&[2, 3, 5], 3, selfcheck::PSU_MARKED)]),
        secs(120),
    );
    push(6, "character transformation law", timed(|| vec![selfcheck::check_transformation_law(&grid)]), secs(120));
    push(7, "Weyl and Freudenthal characters, dim <= 500", timed(|| vec![selfcheck::check_dual_evaluation(&grid, 500)]), secs(120));
    push(8, "exceptional element lattice criterion", timed(|| vec![selfcheck::check_kostant(&grid)]), secs(60));
    push(9, "#T_l against enumeration, rank <= 3, l <= 8", timed(|| vec![selfcheck::check_t_count(3, 8)]), secs(60));
    push(10, "fixed-point numerics", timed(|| selfcheck::fixed_point_checks(SuiteSize::FULL, SEED)), secs(180));
    push(11, "commuting Clifford lifts, N in {4, 6, 8}", timed(|| vec![selfcheck::check_clifford(&[4, 6, 8])]), secs(1));
    push(12, "conjugacy-class formula equals component sum", (vec![dual], sweep_time), secs(120));

    let failed = lines.iter().filter(|l| !l.passed()).count();
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
