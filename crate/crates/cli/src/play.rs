//! Walks a strategy interactively against a real balance.

use std::io::{self, BufRead, Write};

use coinweigh::model::{Candidate, Outcome};
use coinweigh::StrategyTree;

pub enum PlayEnd {
    #[allow(dead_code)]
    Identified(Candidate),
    /// the answers lead to a branch no candidate can reach
    Inconsistent,
    Eof,
}

fn render_answer(x: &Candidate) -> String {
    x.0.iter()
        .enumerate()
        .map(|(i, v)| format!("s{}.{}", i + 1, v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn play<R: BufRead, W: Write>(
    tree: &StrategyTree,
    input: &mut R,
    out: &mut W,
) -> io::Result<PlayEnd> {
    let mut node = tree;
    let mut step = 1;
    loop {
        match node {
            StrategyTree::Leaf(x) => {
                writeln!(out, "counterfeits: {} {}", x, render_answer(x))?;
                return Ok(PlayEnd::Identified(x.clone()));
            }
            StrategyTree::Unreachable => {
                writeln!(out, "no candidate is consistent with these outcomes")?;
                return Ok(PlayEnd::Inconsistent);
            }
            StrategyTree::Node { weighing, children } => {
                writeln!(out, "weighing {step}: {weighing}")?;
                let o = loop {
                    write!(
                        out,
                        "outcome [L = left heavy, B = balanced, R = right heavy]: "
                    )?;
                    out.flush()?;
                    let mut line = String::new();
                    if input.read_line(&mut line)? == 0 {
                        writeln!(out)?;
                        return Ok(PlayEnd::Eof);
                    }
                    match line.trim().to_ascii_uppercase().as_str() {
                        "L" => break Outcome::LeftHeavy,
                        "B" => break Outcome::Balanced,
                        "R" => break Outcome::RightHeavy,
                        other => writeln!(out, "unrecognised answer {other:?}")?,
                    }
                };
                node = &children[o.index()];
                step += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coinweigh::model::{outcome, CandidateSet, Instance};
    use coinweigh::solver::{solve_exact, SearchBudget, SolverOptions};

    fn five_five() -> (Instance, StrategyTree) {
        let inst: Instance = "5,5".parse().unwrap();
        let r = solve_exact(
            &inst,
            SearchBudget::for_lower_bound(3),
            SolverOptions::default(),
        )
        .unwrap();
        let coinweigh::solver::SearchResult::Optimal { tree, .. } = r.result else {
            panic!()
        };
        (inst, tree)
    }

    fn keys(tree: &StrategyTree, inst: &Instance, x: &Candidate) -> String {
        let mut node = tree;
        let mut s = String::new();
        while let StrategyTree::Node { weighing, children } = node {
            let o = outcome(inst, weighing, x).unwrap();
            s.push_str(["L\n", "B\n", "R\n"][o.index()]);
            node = &children[o.index()];
        }
        s
    }

    #[test]
    fn replays_every_candidate() {
        let (inst, tree) = five_five();
        for x in CandidateSet::full_space(&inst).unwrap().iter() {
            let answers = keys(&tree, &inst, &x);
            let mut out = Vec::new();
            let end = play(&tree, &mut answers.as_bytes(), &mut out).unwrap();
            assert!(matches!(end, PlayEnd::Identified(ref y) if *y == x));
        }
    }

    #[test]
    fn reprompts_on_bad_input() {
        let (_, tree) = five_five();
        let mut out = Vec::new();
        let end = play(&tree, &mut "X\nb\nB\nB\n".as_bytes(), &mut out).unwrap();
        assert!(matches!(end, PlayEnd::Identified(_)));
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("unrecognised answer \"X\""));
    }

    #[test]
    fn eof_aborts() {
        let (_, tree) = five_five();
        let mut out = Vec::new();
        let end = play(&tree, &mut "L\n".as_bytes(), &mut out).unwrap();
        assert!(matches!(end, PlayEnd::Eof));
    }

    #[test]
    fn depth_zero_answers_at_once() {
        let tree = StrategyTree::Leaf(Candidate(vec![1, 1]));
        let mut out = Vec::new();
        let end = play(&tree, &mut "".as_bytes(), &mut out).unwrap();
        assert!(matches!(end, PlayEnd::Identified(_)));
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "counterfeits: (1,1) s1.1 s2.1\n"
        );
    }
}
