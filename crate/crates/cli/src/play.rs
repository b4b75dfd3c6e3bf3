//! Line-oriented games against the engine.
//!
//! The engine always plays a move realizing the remoteness recurrence: on
//! winning positions it hurries, on losing positions it picks a successor of
//! largest remoteness. Ties go to the successor of lowest rank.

use anyhow::Result;
use slownim::{apply_keep, apply_move, is_terminal, rank, GameSpec, MoveChoice, Position, Solver, Version};

use crate::args::{PlayArgs, Side};
use crate::{CliError, Io, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    Human,
    Engine,
}

impl Player {
    fn other(self) -> Self {
        match self {
            Player::Human => Player::Engine,
            Player::Engine => Player::Human,
        }
    }
}

/// How a session ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ending {
    Won(Player),
    Resigned,
    InputClosed,
}

/// The engine's move from a non-terminal position.
pub fn engine_move(solver: &Solver, x: &Position) -> Result<(MoveChoice, Position)> {
    let cap = x.largest();
    let mut best: Option<(usize, MoveChoice, Position)> = None;
    for (mv, y) in solver.optimal_moves(x)? {
        let r = rank(&y, cap)?;
        if best.as_ref().is_none_or(|(b, _, _)| r < *b) {
            best = Some((r, mv, y));
        }
    }
    let (_, mv, y) = best.expect("non-terminal positions have an optimal move");
    Ok((mv, y))
}

enum Parsed {
    Move(MoveChoice),
    Keep(usize),
    Quit,
}

fn parse_command(line: &str, spec: &GameSpec) -> std::result::Result<Parsed, String> {
    let line = line.trim();
    let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    match word {
        "quit" | "resign" => Ok(Parsed::Quit),
        "keep" => {
            if !spec.is_keep_one() {
                return Err(format!("`keep` needs k = n - 1; use `reduce` with {} indices", spec.k));
            }
            rest.trim().parse::<usize>().map(Parsed::Keep).map_err(|_| "usage: keep <index>".into())
        }
        "reduce" => {
            let idx = rest
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| "usage: reduce <i,j,...>".to_string())?;
            Ok(Parsed::Move(MoveChoice { reduced: idx }))
        }
        "" => Err("enter a move".into()),
        other => Err(format!("unknown command `{other}`")),
    }
}

fn describe(spec: &GameSpec) -> String {
    let rule = match spec.version {
        Version::Normal => "normal play: the player who cannot move loses",
        Version::Misere => "misere play: the player who cannot move wins",
    };
    format!("{} piles, each move takes one stone from exactly {} of them; {rule}", spec.n, spec.k)
}

/// Plays from `start` until someone cannot move, the human resigns, or the
/// input ends.
pub fn session(start: &Position, spec: GameSpec, human_first: bool, io: &mut Io<'_>) -> Result<Ending> {
    let solver = Solver::new(spec);
    let mut x = start.clone();
    let mut to_move = if human_first { Player::Human } else { Player::Engine };
    writeln!(io.out, "{}", describe(&spec))?;
    writeln!(io.out, "piles are listed in sorted order and indexed from 0")?;
    loop {
        writeln!(io.out, "position: {x}")?;
        if is_terminal(&x, &spec)? {
            let winner = match spec.version {
                Version::Normal => to_move.other(),
                Version::Misere => to_move,
            };
            let who = match to_move {
                Player::Human => "you cannot move",
                Player::Engine => "engine cannot move",
            };
            let verdict = match winner {
                Player::Human => "you win",
                Player::Engine => "engine wins",
            };
            writeln!(io.out, "{who}; {verdict}")?;
            return Ok(Ending::Won(winner));
        }
        match to_move {
            Player::Engine => {
                let (mv, y) = engine_move(&solver, &x)?;
                match mv.kept_index(spec.n) {
                    Some(kept) => writeln!(io.out, "engine: keep {kept} -> {y}")?,
                    None => {
                        let idx: Vec<String> = mv.reduced.iter().map(|i| i.to_string()).collect();
                        writeln!(io.out, "engine: reduce {} -> {y}", idx.join(","))?;
                    }
                }
                x = y;
            }
            Player::Human => {
                let y = loop {
                    write!(io.out, "your move> ")?;
                    io.out.flush()?;
                    let mut line = String::new();
                    if io.input.read_line(&mut line)? == 0 {
                        writeln!(io.out)?;
                        writeln!(io.out, "input closed; game abandoned")?;
                        return Ok(Ending::InputClosed);
                    }
                    let applied = match parse_command(&line, &spec) {
                        Ok(Parsed::Quit) => {
                            writeln!(io.out, "you resign; engine wins")?;
                            return Ok(Ending::Resigned);
                        }
                        Ok(Parsed::Keep(i)) => apply_keep(&x, i, &spec).map_err(|e| e.to_string()),
                        Ok(Parsed::Move(mv)) => apply_move(&x, &mv, &spec).map_err(|e| e.to_string()),
                        Err(e) => Err(e),
                    };
                    match applied {
                        Ok(y) => break y,
                        Err(e) => writeln!(io.out, "rejected: {e}")?,
                    }
                };
                writeln!(io.out, "you -> {y}")?;
                x = y;
            }
        }
        to_move = to_move.other();
    }
}

pub fn run(a: &PlayArgs, io: &mut Io<'_>) -> Result<Status> {
    let n = a.piles.len();
    if n < 2 {
        return Err(CliError::Usage("play needs at least 2 piles".into()).into());
    }
    let spec = GameSpec::new(n, a.k.unwrap_or(n - 1), a.version.into())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    session(&a.piles, spec, a.human == Side::First, io)?;
    Ok(Status::Success)
}
