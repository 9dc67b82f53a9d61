//! Reference contours built from lines and circular arcs.

use std::f64::consts::{FRAC_PI_2, PI};

use ccilc::Signal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Profile {
    /// Uniform speed along the path.
    #[default]
    Constant,
    /// `s(t) = L (t - sin(2 pi t) / (2 pi))`: zero speed and acceleration at
    /// both ends.
    Smooth,
}

#[derive(Clone, Copy, Debug)]
pub enum Primitive {
    Line {
        from: [f64; 2],
        to: [f64; 2],
    },
    Arc {
        center: [f64; 2],
        radius: f64,
        from: f64,
        to: f64,
    },
}

impl Primitive {
    pub fn length(&self) -> f64 {
        match *self {
            Primitive::Line { from, to } => (to[0] - from[0]).hypot(to[1] - from[1]),
            Primitive::Arc {
                radius, from, to, ..
            } => radius * (to - from).abs(),
        }
    }

    /// Point `[x, y]` at distance `s` from the start.
    fn at(&self, s: f64) -> [f64; 2] {
        let len = self.length();
        let t = if len > 0.0 {
            (s / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        match *self {
            Primitive::Line { from, to } => [
                from[0] + t * (to[0] - from[0]),
                from[1] + t * (to[1] - from[1]),
            ],
            Primitive::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let a = from + t * (to - from);
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
        }
    }
}

pub fn line(from: [f64; 2], to: [f64; 2]) -> Vec<Primitive> {
    vec![Primitive::Line { from, to }]
}

pub fn arc(center: [f64; 2], radius: f64, from: f64, to: f64) -> Vec<Primitive> {
    vec![Primitive::Arc {
        center,
        radius,
        from,
        to,
    }]
}

/// Closed counter-clockwise loop starting and ending at the middle of the
/// bottom edge.
pub fn rounded_rectangle(center: [f64; 2], width: f64, height: f64, radius: f64) -> Vec<Primitive> {
    let (cx, cy) = (center[0], center[1]);
    let (hw, hh, r) = (width / 2.0, height / 2.0, radius);
    let corners = [
        [cx + hw - r, cy - hh + r],
        [cx + hw - r, cy + hh - r],
        [cx - hw + r, cy + hh - r],
        [cx - hw + r, cy - hh + r],
    ];
    let mut out = vec![Primitive::Line {
        from: [cx, cy - hh],
        to: [cx + hw - r, cy - hh],
    }];
    let edges = [
        ([cx + hw, cy - hh + r], [cx + hw, cy + hh - r]),
        ([cx + hw - r, cy + hh], [cx - hw + r, cy + hh]),
        ([cx - hw, cy + hh - r], [cx - hw, cy - hh + r]),
        ([cx - hw + r, cy - hh], [cx, cy - hh]),
    ];
    for (i, (c, e)) in corners.iter().zip(edges).enumerate() {
        let start = -FRAC_PI_2 + i as f64 * FRAC_PI_2;
        if r > 0.0 {
            out.push(Primitive::Arc {
                center: *c,
                radius: r,
                from: start,
                to: start + FRAC_PI_2,
            });
        }
        out.push(Primitive::Line { from: e.0, to: e.1 });
    }
    out
}

/// Samples the path into a two-channel reference `[y, x]` of `samples`
/// points, holding the end points for `dwell` samples on each side.
pub fn sample(
    path: &[Primitive],
    samples: usize,
    dwell: usize,
    profile: Profile,
) -> Result<Signal, String> {
    let moving = samples
        .checked_sub(2 * dwell)
        .filter(|m| *m >= 2)
        .ok_or_else(|| {
            format!("{samples} samples leave fewer than 2 after {dwell} dwell samples per side")
        })?;
    let lengths: Vec<f64> = path.iter().map(Primitive::length).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err("contour has zero length".into());
    }
    let point = |s: f64| {
        let mut rest = s.clamp(0.0, total);
        for (p, len) in path.iter().zip(&lengths) {
            if rest <= *len {
                return p.at(rest);
            }
            rest -= len;
        }
        let last = path.last().unwrap();
        last.at(last.length())
    };
    let mut data = Vec::with_capacity(2 * samples);
    let mut push = |p: [f64; 2]| {
        data.push(p[1]);
        data.push(p[0]);
    };
    for _ in 0..dwell {
        push(point(0.0));
    }
    for i in 0..moving {
        let t = i as f64 / (moving - 1) as f64;
        let s = match profile {
            Profile::Constant => total * t,
            Profile::Smooth => total * (t - (2.0 * PI * t).sin() / (2.0 * PI)),
        };
        push(point(s));
    }
    for _ in 0..dwell {
        push(point(total));
    }
    Signal::from_stacked(2, data).map_err(|e| e.to_string())
}
