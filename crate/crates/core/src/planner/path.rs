//! Path primitives (segments and circular arcs) and Dubins connections.

use std::f64::consts::{PI, TAU};

use crate::geometry::{wrap_angle, Point, Polygon};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub p: Point,
    pub heading: f64,
}

impl Pose {
    pub fn new(p: Point, heading: f64) -> Self {
        Self { p, heading }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.p, wrap_angle(self.heading + PI))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prim {
    Line { a: Point, b: Point },
    /// Arc about `c`; polar angle runs from `a0` through `a0 + sweep`.
    /// Positive sweep turns left.
    Arc { c: Point, r: f64, a0: f64, sweep: f64 },
}

impl Prim {
    pub fn length(&self) -> f64 {
        match *self {
            Prim::Line { a, b } => a.distance(b),
            Prim::Arc { r, sweep, .. } => r * sweep.abs(),
        }
    }

    pub fn pose_at(&self, s: f64) -> Pose {
        match *self {
            Prim::Line { a, b } => {
                let len = a.distance(b);
                let h = (b.y - a.y).atan2(b.x - a.x);
                let t = if len > 0.0 { (s / len).clamp(0.0, 1.0) } else { 0.0 };
                Pose::new(a.lerp(b, t), h)
            }
            Prim::Arc { c, r, a0, sweep } => {
                let sign = sweep.signum();
                let phi = a0 + sign * (s / r).clamp(0.0, sweep.abs());
                let p = c + Point::new(phi.cos(), phi.sin()) * r;
                Pose::new(p, wrap_angle(phi + sign * PI / 2.0))
            }
        }
    }

    pub fn start(&self) -> Pose {
        self.pose_at(0.0)
    }

    pub fn end(&self) -> Pose {
        self.pose_at(self.length())
    }

    /// Sub-primitive between arc lengths `s0 <= s1`.
    pub fn split(&self, s0: f64, s1: f64) -> Prim {
        match *self {
            Prim::Line { .. } => Prim::Line {
                a: self.pose_at(s0).p,
                b: self.pose_at(s1).p,
            },
            Prim::Arc { c, r, a0, sweep } => {
                let sign = sweep.signum();
                Prim::Arc {
                    c,
                    r,
                    a0: a0 + sign * s0 / r,
                    sweep: sign * (s1 - s0) / r,
                }
            }
        }
    }

    pub fn reversed(&self) -> Prim {
        match *self {
            Prim::Line { a, b } => Prim::Line { a: b, b: a },
            Prim::Arc { c, r, a0, sweep } => Prim::Arc {
                c,
                r,
                a0: a0 + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Arc length of the point on this primitive nearest to `p`.
    pub fn project(&self, p: Point) -> f64 {
        match *self {
            Prim::Line { a, b } => {
                let d = b - a;
                let len2 = d.dot(d);
                if len2 == 0.0 {
                    return 0.0;
                }
                ((p - a).dot(d) / len2).clamp(0.0, 1.0) * len2.sqrt()
            }
            Prim::Arc { c, r, a0, sweep } => {
                let phi = (p.y - c.y).atan2(p.x - c.x);
                let rel = (phi - a0) * sweep.signum();
                let rel = rel.rem_euclid(TAU);
                let span = sweep.abs();
                if rel <= span {
                    rel * r
                } else if rel - span < TAU - rel {
                    span * r
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn chain_length(prims: &[Prim]) -> f64 {
    prims.iter().map(Prim::length).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Turn {
    L,
    S,
    R,
}

fn mod2pi(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Candidate words as (t, p, q) in radius-normalised units.
fn dubins_words(alpha: f64, beta: f64, d: f64) -> Vec<([Turn; 3], [f64; 3])> {
    use Turn::*;
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let cab = (alpha - beta).cos();
    let mut out = Vec::with_capacity(6);

    let tmp = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
    if tmp >= 0.0 {
        let th = (cb - ca).atan2(d + sa - sb);
        out.push(([L, S, L], [mod2pi(-alpha + th), tmp.sqrt(), mod2pi(beta - th)]));
    }
    let tmp = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
    if tmp >= 0.0 {
        let th = (ca - cb).atan2(d - sa + sb);
        out.push(([R, S, R], [mod2pi(alpha - th), tmp.sqrt(), mod2pi(-beta + th)]));
    }
    let tmp = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
    if tmp >= 0.0 {
        let p = tmp.sqrt();
        let th = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
        out.push(([L, S, R], [mod2pi(-alpha + th), p, mod2pi(-beta + th)]));
    }
    let tmp = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
    if tmp >= 0.0 {
        let p = tmp.sqrt();
        let th = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
        out.push(([R, S, L], [mod2pi(alpha - th), p, mod2pi(beta - th)]));
    }
    let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
    if tmp.abs() <= 1.0 {
        let p = mod2pi(TAU - tmp.acos());
        let t = mod2pi(alpha - (ca - cb).atan2(d - sa + sb) + p / 2.0);
        out.push(([R, L, R], [t, p, mod2pi(alpha - beta - t + p)]));
    }
    let tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
    if tmp.abs() <= 1.0 {
        let p = mod2pi(TAU - tmp.acos());
        let t = mod2pi(-alpha - (ca - cb).atan2(d + sa - sb) + p / 2.0);
        out.push(([L, R, L], [t, p, mod2pi(beta - alpha - t + p)]));
    }
    out
}

fn build_word(start: Pose, r: f64, word: [Turn; 3], params: [f64; 3]) -> Vec<Prim> {
    let mut pose = start;
    let mut prims = Vec::with_capacity(3);
    for (turn, &u) in word.iter().zip(params.iter()) {
        if u <= 1e-12 {
            continue;
        }
        let prim = match turn {
            Turn::S => {
                let b = pose.p + Point::from_heading(pose.heading) * (u * r);
                Prim::Line { a: pose.p, b }
            }
            Turn::L | Turn::R => {
                let sign = if *turn == Turn::L { 1.0 } else { -1.0 };
                let normal = Point::new(-pose.heading.sin(), pose.heading.cos()) * sign;
                let c = pose.p + normal * r;
                Prim::Arc {
                    c,
                    r,
                    a0: pose.heading - sign * PI / 2.0,
                    sweep: sign * u,
                }
            }
        };
        pose = prim.end();
        prims.push(prim);
    }
    prims
}

/// All feasible Dubins paths from `a` to `b` with turning radius `r`,
/// shortest first. Words whose endpoint misses `b` are discarded.
pub fn dubins_all(a: Pose, b: Pose, r: f64) -> Vec<Vec<Prim>> {
    let dx = b.p.x - a.p.x;
    let dy = b.p.y - a.p.y;
    let d = (dx * dx + dy * dy).sqrt() / r;
    let theta = mod2pi(dy.atan2(dx));
    let alpha = mod2pi(a.heading - theta);
    let beta = mod2pi(b.heading - theta);
    let mut paths: Vec<(f64, Vec<Prim>)> = dubins_words(alpha, beta, d)
        .into_iter()
        .map(|(w, p)| ((p[0] + p[1] + p[2]) * r, build_word(a, r, w, p)))
        .filter(|(_, prims)| {
            let end = prims.last().map(|q| q.end()).unwrap_or(a);
            end.p.distance(b.p) < 1e-6 * r.max(1.0)
                && wrap_angle(end.heading - b.heading).abs() < 1e-6
        })
        .collect();
    paths.sort_by(|x, y| x.0.total_cmp(&y.0));
    paths.into_iter().map(|(_, p)| p).collect()
}

pub fn dubins(a: Pose, b: Pose, r: f64) -> Vec<Prim> {
    dubins_all(a, b, r)
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![Prim::Line { a: a.p, b: b.p }])
}

/// Closed chain of primitives, parametrised by arc length from its start.
#[derive(Debug, Clone)]
pub struct Ring {
    prims: Vec<Prim>,
    cum: Vec<f64>,
    length: f64,
}

impl Ring {
    pub fn new(prims: Vec<Prim>) -> Self {
        let mut cum = Vec::with_capacity(prims.len() + 1);
        let mut s = 0.0;
        cum.push(0.0);
        for p in &prims {
            s += p.length();
            cum.push(s);
        }
        Self {
            prims,
            cum,
            length: s,
        }
    }

    /// Polygon ring with every corner replaced by a tangent arc of radius
    /// `r`, shrunk where the adjacent edges are too short.
    pub fn filleted(poly: &Polygon, r: f64) -> Self {
        let v = poly.vertices();
        let n = v.len();
        let mut tangents: Vec<(Point, Point, Option<Prim>)> = Vec::with_capacity(n);
        for k in 0..n {
            let prev = v[(k + n - 1) % n];
            let cur = v[k];
            let next = v[(k + 1) % n];
            let din = cur - prev;
            let dout = next - cur;
            let (lin, lout) = (din.norm(), dout.norm());
            let (din, dout) = (din * (1.0 / lin), dout * (1.0 / lout));
            let turn = din.cross(dout).atan2(din.dot(dout));
            if turn.abs() < 1e-9 {
                tangents.push((cur, cur, None));
                continue;
            }
            let half_tan = (turn.abs() / 2.0).tan();
            let rr = r.min(0.5 * lin.min(lout) / half_tan);
            let tl = rr * half_tan;
            let t0 = cur - din * tl;
            let t1 = cur + dout * tl;
            let sign = turn.signum();
            let c = t0 + Point::new(-din.y, din.x) * (rr * sign);
            let a0 = (t0.y - c.y).atan2(t0.x - c.x);
            tangents.push((t0, t1, Some(Prim::Arc { c, r: rr, a0, sweep: turn })));
        }
        let mut prims = Vec::with_capacity(2 * n);
        for k in 0..n {
            let (_, t1, _) = tangents[k];
            let (t0_next, _, arc_next) = tangents[(k + 1) % n];
            if t1.distance(t0_next) > 1e-9 {
                prims.push(Prim::Line { a: t1, b: t0_next });
            }
            if let Some(arc) = arc_next {
                prims.push(arc);
            }
        }
        Self::new(prims)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn prims(&self) -> &[Prim] {
        &self.prims
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.length);
        let k = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(k) => k.min(self.prims.len() - 1),
            Err(k) => k - 1,
        };
        (k, s - self.cum[k])
    }

    pub fn pose_at(&self, s: f64) -> Pose {
        let (k, local) = self.locate(s);
        self.prims[k].pose_at(local)
    }

    /// Ring parameter of the point nearest to `p`.
    pub fn nearest(&self, p: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (k, prim) in self.prims.iter().enumerate() {
            let local = prim.project(p);
            let d = prim.pose_at(local).p.distance(p);
            if d < best.0 {
                best = (d, self.cum[k] + local);
            }
        }
        best.1
    }

    /// Primitives covering `len` metres from `s0`, forward when `len > 0`
    /// and backward otherwise; wraps around the ring.
    pub fn section(&self, s0: f64, len: f64) -> Vec<Prim> {
        if len < 0.0 {
            return self
                .section(s0 + len, -len)
                .iter()
                .rev()
                .map(Prim::reversed)
                .collect();
        }
        let mut out = Vec::new();
        let mut remaining = len;
        let (mut k, mut local) = self.locate(s0);
        while remaining > 1e-12 {
            let plen = self.prims[k].length();
            let take = (plen - local).min(remaining);
            if take > 1e-12 {
                out.push(self.prims[k].split(local, local + take));
            }
            remaining -= take;
            k = (k + 1) % self.prims.len();
            local = 0.0;
        }
        out
    }

    /// Forward distance from `a` to `b` along the ring.
    pub fn forward(&self, a: f64, b: f64) -> f64 {
        (b - a).rem_euclid(self.length)
    }
}
