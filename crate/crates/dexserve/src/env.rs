use crate::error::ServeError;

/// Positions live in `[-ENV_BOUND, ENV_BOUND]` on both axes.
pub const ENV_BOUND: f64 = 10.0;

/// Default cap on the Euclidean length of one displacement.
pub const DEFAULT_MAX_STEP: f64 = 0.1;

/// Default goal radius that counts as success.
pub const DEFAULT_SUCCESS_RADIUS: f64 = 0.05;

/// Side length of the rendered observation image, in pixels.
pub const RENDER_SIZE: usize = 64;

/// A 2-D point mass on a bounded plane. Actions are displacement
/// requests; the environment clips each to `max_step` (Euclidean) and
/// clamps the resulting position to the arena. The episode succeeds once
/// the point is within `success_radius` of the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEnv {
    pos: [f64; 2],
    goal: [f64; 2],
    max_step: f64,
    success_radius: f64,
}

impl ToyEnv {
    /// Build an environment with the default step cap and goal radius.
    pub fn new(start: [f64; 2], goal: [f64; 2]) -> Result<Self, ServeError> {
        ToyEnv::with_limits(start, goal, DEFAULT_MAX_STEP, DEFAULT_SUCCESS_RADIUS)
    }

    /// `start` and `goal` must be finite and inside the arena; `max_step`
    /// and `success_radius` must be finite and positive.
    pub fn with_limits(
        start: [f64; 2],
        goal: [f64; 2],
        max_step: f64,
        success_radius: f64,
    ) -> Result<Self, ServeError> {
        for (name, point) in [("start", start), ("goal", goal)] {
            for x in point {
                if !x.is_finite() || x.abs() > ENV_BOUND {
                    return Err(ServeError::Env(format!(
                        "{name} {point:?} is outside the arena [-{ENV_BOUND}, {ENV_BOUND}]^2"
                    )));
                }
            }
        }
        if !max_step.is_finite() || max_step <= 0.0 {
            return Err(ServeError::Env(format!(
                "max_step must be finite and positive, got {max_step}"
            )));
        }
        if !success_radius.is_finite() || success_radius <= 0.0 {
            return Err(ServeError::Env(format!(
                "success_radius must be finite and positive, got {success_radius}"
            )));
        }
        Ok(ToyEnv {
            pos: start,
            goal,
            max_step,
            success_radius,
        })
    }

    pub fn pos(&self) -> [f64; 2] {
        self.pos
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    /// Current position as the state vector sent to the gateway.
    pub fn state(&self) -> Vec<f64> {
        self.pos.to_vec()
    }

    pub fn distance_to_goal(&self) -> f64 {
        f64::hypot(self.pos[0] - self.goal[0], self.pos[1] - self.goal[1])
    }

    pub fn is_success(&self) -> bool {
        self.distance_to_goal() <= self.success_radius
    }

    /// Apply one displacement. The first two action values are the
    /// requested (dx, dy); extra dimensions are ignored so higher-dof
    /// policies can still drive the plane.
    pub fn step(&mut self, action: &[f64]) -> Result<(), ServeError> {
        if action.len() < 2 {
            return Err(ServeError::Env(format!(
                "action needs at least two values (dx, dy), got {}",
                action.len()
            )));
        }
        let mut delta = [action[0], action[1]];
        if !delta[0].is_finite() || !delta[1].is_finite() {
            return Err(ServeError::Env(format!(
                "action ({}, {}) is not finite",
                delta[0], delta[1]
            )));
        }
        let norm = f64::hypot(delta[0], delta[1]);
        if norm > self.max_step {
            let scale = self.max_step / norm;
            delta = [delta[0] * scale, delta[1] * scale];
        }
        self.pos = [
            (self.pos[0] + delta[0]).clamp(-ENV_BOUND, ENV_BOUND),
            (self.pos[1] + delta[1]).clamp(-ENV_BOUND, ENV_BOUND),
        ];
        Ok(())
    }

    /// Render the arena as a 64x64 binary PPM (P6): white background,
    /// green 3x3 goal marker, red 3x3 agent marker drawn on top. A pure
    /// function of the current state, so identical states render to
    /// identical bytes.
    pub fn render(&self) -> Vec<u8> {
        let mut pixels = vec![255u8; RENDER_SIZE * RENDER_SIZE * 3];
        blit(&mut pixels, self.goal, [0, 160, 0]);
        blit(&mut pixels, self.pos, [220, 0, 0]);
        let mut out = format!("P6\n{RENDER_SIZE} {RENDER_SIZE}\n255\n").into_bytes();
        out.extend_from_slice(&pixels);
        out
    }
}

/// Map a world coordinate onto a pixel index along one axis.
fn to_pixel(x: f64) -> i64 {
    let unit = (x + ENV_BOUND) / (2.0 * ENV_BOUND);
    (unit * (RENDER_SIZE - 1) as f64).round() as i64
}

/// Stamp a 3x3 block centered on a world point, clipped to the canvas.
fn blit(pixels: &mut [u8], point: [f64; 2], rgb: [u8; 3]) {
    let cx = to_pixel(point[0]);
    // Image rows grow downward while world y grows upward.
    let cy = (RENDER_SIZE - 1) as i64 - to_pixel(point[1]);
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (x, y) = (cx + dx, cy + dy);
            if (0..RENDER_SIZE as i64).contains(&x) && (0..RENDER_SIZE as i64).contains(&y) {
                let at = (y as usize * RENDER_SIZE + x as usize) * 3;
                pixels[at..at + 3].copy_from_slice(&rgb);
            }
        }
    }
}
