//! ASCII frames for grid domains.
//!
//! Hints come from the `render.*` settings keys:
//! `width`, `height`, `net` (column of the net, optional), `ball` (the two
//! fluents holding its position) and `white`/`black` (player names; player
//! `p` is drawn at `x_p`, `y_p` and holds the ball when `hasball_p > 0`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HintError {
    #[error("missing render hint `{0}`")]
    Missing(&'static str),
    #[error("bad render hint `{key}`: {value}")]
    Bad { key: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderHints {
    pub width: usize,
    pub height: usize,
    pub net: Option<usize>,
    pub ball: Option<(String, String)>,
    pub white: Vec<String>,
    pub black: Vec<String>,
}

fn size(hints: &BTreeMap<String, String>, key: &'static str) -> Result<usize, HintError> {
    let v = hints.get(key).ok_or(HintError::Missing(key))?;
    match v.trim().parse() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(HintError::Bad { key, value: v.clone() }),
    }
}

fn names(hints: &BTreeMap<String, String>, key: &str) -> Vec<String> {
    hints.get(key).map(|v| v.split_whitespace().map(str::to_string).collect()).unwrap_or_default()
}

impl RenderHints {
    pub fn from_map(hints: &BTreeMap<String, String>) -> Result<RenderHints, HintError> {
        let width = size(hints, "width")?;
        let height = size(hints, "height")?;
        let net = match hints.get("net") {
            None => None,
            Some(_) => Some(size(hints, "net")?),
        };
        let ball = match names(hints, "ball")[..] {
            [] => None,
            [ref x, ref y] => Some((x.clone(), y.clone())),
            _ => return Err(HintError::Bad { key: "ball", value: hints["ball"].clone() }),
        };
        let white = names(hints, "white");
        let black = names(hints, "black");
        if white.is_empty() && black.is_empty() && ball.is_none() {
            return Err(HintError::Missing("white"));
        }
        Ok(RenderHints { width, height, net, ball, white, black })
    }

    /// One frame, `width + 2` columns by `height + 2` rows, without a label.
    pub fn frame(&self, state: &BTreeMap<String, i64>) -> Vec<String> {
        let (w, h) = (self.width + 2, self.height + 2);
        let mut grid = vec![vec![' '; w]; h];
        for (r, row) in grid.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                if r == 0 || r == h - 1 || c == 0 || c == w - 1 {
                    *cell = '*';
                }
                if Some(c) == self.net {
                    *cell = '|';
                }
            }
        }
        let cell = |x: i64, y: i64| -> Option<(usize, usize)> {
            let ok = (1..=self.width as i64).contains(&x) && (1..=self.height as i64).contains(&y);
            ok.then(|| ((self.height as i64 - y + 1) as usize, x as usize))
        };
        if let Some((bx, by)) = &self.ball {
            if let (Some(&x), Some(&y)) = (state.get(bx), state.get(by)) {
                if let Some((r, c)) = cell(x, y) {
                    grid[r][c] = 'o';
                }
            }
        }
        for (team, plain, holding) in [(&self.white, 'O', 'Q'), (&self.black, 'Y', 'X')] {
            for p in team {
                let (Some(&x), Some(&y)) = (state.get(&format!("x_{p}")), state.get(&format!("y_{p}"))) else { continue };
                let has = state.get(&format!("hasball_{p}")).is_some_and(|v| *v > 0);
                if let Some((r, c)) = cell(x, y) {
                    grid[r][c] = if has { holding } else { plain };
                }
            }
        }
        grid.into_iter().map(|row| row.into_iter().collect()).collect()
    }
}

/// Labelled frames, one per state, separated by blank lines.
pub fn render_grid(hints: &RenderHints, states: &[BTreeMap<String, i64>]) -> String {
    let mut out = String::new();
    for (t, s) in states.iter().enumerate() {
        if t > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Time {t}:");
        for row in hints.frame(s) {
            let _ = writeln!(out, "{row}");
        }
    }
    out
}
