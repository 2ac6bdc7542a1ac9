//! Cart-pole balancing with explicit Euler integration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartPoleConfig {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub pole_half_length: f64,
    pub dt: f64,
    pub force_magnitude: f64,
    pub x_max: f64,
    /// Radians.
    pub theta_max: f64,
    pub t_max: usize,
    /// Initial `(x, ẋ, θ, θ̇)` are uniform on `±init_fraction` of
    /// `(x_max, init_velocity_scale, theta_max, init_angular_velocity_scale)`.
    pub init_fraction: f64,
    pub init_velocity_scale: f64,
    pub init_angular_velocity_scale: f64,
}

impl Default for CartPoleConfig {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            dt: 0.02,
            force_magnitude: 10.0,
            x_max: 2.4,
            theta_max: 12f64.to_radians(),
            t_max: 300,
            init_fraction: 0.05,
            init_velocity_scale: 3.0,
            init_angular_velocity_scale: 3.0,
        }
    }
}

impl CartPoleConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gravity", self.gravity),
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("pole_half_length", self.pole_half_length),
            ("dt", self.dt),
            ("x_max", self.x_max),
            ("theta_max", self.theta_max),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!("cartpole {name} must be positive")));
        }
        let non_negative = [
            ("force_magnitude", self.force_magnitude),
            ("init_fraction", self.init_fraction),
            ("init_velocity_scale", self.init_velocity_scale),
            ("init_angular_velocity_scale", self.init_angular_velocity_scale),
        ];
        if let Some((name, _)) = non_negative.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("cartpole {name} must be non-negative")));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidArgument("cartpole t_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    /// One Euler step of the equations of motion under horizontal `force`.
    pub fn advance(&self, c: &CartPoleConfig, force: f64) -> Self {
        let total_mass = c.cart_mass + c.pole_mass;
        let ml = c.pole_mass * c.pole_half_length;
        let (sin, cos) = self.theta.sin_cos();
        let temp = (force + ml * self.theta_dot * self.theta_dot * sin) / total_mass;
        let theta_acc =
            (c.gravity * sin - cos * temp) / (c.pole_half_length * (4.0 / 3.0 - c.pole_mass * cos * cos / total_mass));
        let x_acc = temp - ml * theta_acc * cos / total_mass;
        Self {
            x: self.x + c.dt * self.x_dot,
            x_dot: self.x_dot + c.dt * x_acc,
            theta: self.theta + c.dt * self.theta_dot,
            theta_dot: self.theta_dot + c.dt * theta_acc,
        }
    }

    /// Total mechanical energy, treating the pole as a uniform rod pivoting
    /// on the cart. Zero potential at the pivot height.
    pub fn energy(&self, c: &CartPoleConfig) -> f64 {
        let l = c.pole_half_length;
        let kinetic = 0.5 * (c.cart_mass + c.pole_mass) * self.x_dot * self.x_dot
            + c.pole_mass * l * self.x_dot * self.theta_dot * self.theta.cos()
            + 0.5 * (4.0 / 3.0) * c.pole_mass * l * l * self.theta_dot * self.theta_dot;
        kinetic + c.pole_mass * c.gravity * l * self.theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Left,
    Right,
}

impl Action {
    pub fn sign(self) -> f64 {
        match self {
            Action::Left => -1.0,
            Action::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartPoleEnv {
    config: CartPoleConfig,
    state: CartPoleState,
    steps: usize,
    done: bool,
}

impl CartPoleEnv {
    pub fn new(config: CartPoleConfig, state: CartPoleState) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state,
            steps: 0,
            done: false,
        })
    }

    pub fn random(config: CartPoleConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let f = config.init_fraction;
        let mut draw = |bound: f64| {
            if f * bound > 0.0 {
                rng.random_range(-f * bound..f * bound)
            } else {
                0.0
            }
        };
        let state = CartPoleState {
            x: draw(config.x_max),
            x_dot: draw(config.init_velocity_scale),
            theta: draw(config.theta_max),
            theta_dot: draw(config.init_angular_velocity_scale),
        };
        Self::new(config, state)
    }

    pub fn config(&self) -> &CartPoleConfig {
        &self.config
    }

    pub fn state(&self) -> &CartPoleState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Applies `action × force_magnitude` for one timestep. Returns whether
    /// the episode ended on this step.
    pub fn step(&mut self, action: Action) -> Result<bool> {
        if self.done {
            return Err(Error::EpisodeTerminated);
        }
        self.state = self
            .state
            .advance(&self.config, action.sign() * self.config.force_magnitude);
        self.steps += 1;
        let s = &self.state;
        self.done = s.x.abs() > self.config.x_max
            || s.theta.abs() > self.config.theta_max
            || self.steps >= self.config.t_max
            || !s.as_array().iter().all(|v| v.is_finite());
        Ok(self.done)
    }

    /// Runs to termination with `policy` choosing each action; returns the
    /// number of steps survived, in `1..=t_max`.
    pub fn run(&mut self, mut policy: impl FnMut(&CartPoleState) -> Action) -> Result<usize> {
        while !self.done {
            let a = policy(&self.state);
            self.step(a)?;
        }
        Ok(self.steps)
    }
}
