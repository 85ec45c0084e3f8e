//! The orders language and its step-wise interpreter.
//!
//! A program is a list of actions. Setting a target, a motor or a thrust
//! latches a command and takes no time; `wait`, `brake_to_halt` and loop
//! iterations consume oracle steps. `repeat_until` is a do-while loop with
//! an optional iteration limit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ModeError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Condition<T> {
    Ge { field: String, value: T },
    Le { field: String, value: T },
    Gt { field: String, value: T },
    Lt { field: String, value: T },
    Any { of: Vec<Condition<T>> },
    All { of: Vec<Condition<T>> },
}

impl<T: Scalar> Condition<T> {
    pub fn eval(&self, fields: &[String], x: &[T]) -> Result<bool, ModeError> {
        let get = |f: &str| -> Result<T, ModeError> {
            fields
                .iter()
                .position(|n| n == f)
                .map(|i| x[i])
                .ok_or_else(|| ModeError::UnknownField {
                    mode: fields.join(","),
                    field: f.to_string(),
                })
        };
        Ok(match self {
            Condition::Ge { field, value } => get(field)? >= *value,
            Condition::Le { field, value } => get(field)? <= *value,
            Condition::Gt { field, value } => get(field)? > *value,
            Condition::Lt { field, value } => get(field)? < *value,
            Condition::Any { of } => {
                for c in of {
                    if c.eval(fields, x)? {
                        return Ok(true);
                    }
                }
                false
            }
            Condition::All { of } => {
                for c in of {
                    if !c.eval(fields, x)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action<T> {
    /// Aim for `speed`; with `ramp_s`, accelerate at `speed / ramp_s`.
    SetTargetSpeed {
        speed: T,
        ramp_s: Option<T>,
    },
    /// Full brake until `field` (default `v`) reads at most `below`
    /// (default 1).
    BrakeToHalt {
        field: Option<String>,
        below: Option<T>,
    },
    SetMotor { value: T },
    SetThrust { thrust: Vec<T> },
    /// Waits `seconds`, plus a seeded uniform draw from `[0, jitter)`.
    Wait {
        seconds: T,
        jitter: Option<T>,
    },
    RepeatUntil {
        condition: Condition<T>,
        body: Vec<Action<T>>,
        timelimit: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrdersProgram<T> {
    pub steps: Vec<Action<T>>,
}

impl<T> Default for OrdersProgram<T> {
    fn default() -> Self {
        Self { steps: Vec::new() }
    }
}

impl<T> OrdersProgram<T> {
    pub fn new(steps: Vec<Action<T>>) -> Self {
        Self { steps }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// What the orders currently ask the controller for.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command<T> {
    Idle,
    TargetSpeed { speed: T, rate: Option<T> },
    Brake,
    Motor { value: T },
    Thrust { thrust: Vec<T> },
}

#[derive(Debug, Clone)]
enum Block<T> {
    Steps(usize),
    Halt { field: String, below: T },
}

#[derive(Debug, Clone)]
struct Frame<T> {
    body: Vec<Action<T>>,
    pc: usize,
    repeat: Option<Repeat<T>>,
}

#[derive(Debug, Clone)]
struct Repeat<T> {
    condition: Condition<T>,
    left: Option<u32>,
    iterations: u32,
    yielded: bool,
}

/// Executes an [`OrdersProgram`] one oracle step at a time.
#[derive(Debug, Clone)]
pub struct Interpreter<T> {
    frames: Vec<Frame<T>>,
    block: Option<Block<T>>,
    command: Command<T>,
    done: bool,
}

const MAX_INSTANT_ACTIONS: usize = 10_000;

impl<T: Scalar> Interpreter<T> {
    pub fn new(program: &OrdersProgram<T>) -> Self {
        Self {
            frames: vec![Frame {
                body: program.steps.clone(),
                pc: 0,
                repeat: None,
            }],
            block: None,
            command: Command::Idle,
            done: program.steps.is_empty(),
        }
    }

    /// All actions executed and nothing blocking.
    pub fn finished(&self) -> bool {
        self.done
    }

    pub fn command(&self) -> &Command<T> {
        &self.command
    }

    /// Advances the program by one oracle step against the latest
    /// measured state; returns the command to hold for this step and any
    /// milestones worth logging.
    pub fn tick(
        &mut self,
        fields: &[String],
        x: &[T],
        lambda: T,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Command<T>, Vec<Value>), ModeError> {
        let mut events = Vec::new();
        for _ in 0..MAX_INSTANT_ACTIONS {
            if let Some(block) = self.block.take() {
                match block {
                    Block::Steps(n) if n > 0 => {
                        self.block = Some(Block::Steps(n - 1));
                        self.mark_yield();
                        return Ok((self.command.clone(), events));
                    }
                    Block::Steps(_) => {}
                    Block::Halt { field, below } => {
                        let i = fields.iter().position(|f| *f == field).ok_or_else(|| ModeError::UnknownField {
                            mode: fields.join(","),
                            field: field.clone(),
                        })?;
                        if x[i] > below {
                            self.block = Some(Block::Halt { field, below });
                            self.mark_yield();
                            return Ok((self.command.clone(), events));
                        }
                        events.push(json!({ "event": "halted", "speed": x[i].as_f64() }));
                    }
                }
            }
            let Some(frame) = self.frames.last_mut() else {
                self.done = true;
                return Ok((self.command.clone(), events));
            };
            if frame.pc >= frame.body.len() {
                match frame.repeat.as_mut() {
                    None => {
                        self.frames.pop();
                    }
                    Some(rep) => {
                        rep.iterations += 1;
                        let reason = if rep.condition.eval(fields, x)? {
                            Some("condition")
                        } else if rep.left == Some(0) {
                            Some("timelimit")
                        } else {
                            None
                        };
                        if let Some(reason) = reason {
                            events.push(json!({ "event": "loop-exit", "reason": reason, "iterations": rep.iterations }));
                            self.frames.pop();
                        } else {
                            let yielded = rep.yielded;
                            rep.yielded = false;
                            if let Some(l) = rep.left.as_mut() {
                                *l -= 1;
                            }
                            frame.pc = 0;
                            if !yielded {
                                return Ok((self.command.clone(), events));
                            }
                        }
                    }
                }
                continue;
            }
            let action = frame.body[frame.pc].clone();
            frame.pc += 1;
            match action {
                Action::SetTargetSpeed { speed, ramp_s } => {
                    let rate = ramp_s.filter(|r| *r > T::zero()).map(|r| speed / r);
                    self.command = Command::TargetSpeed { speed, rate };
                }
                Action::BrakeToHalt { field, below } => {
                    self.command = Command::Brake;
                    self.block = Some(Block::Halt {
                        field: field.unwrap_or_else(|| "v".into()),
                        below: below.unwrap_or_else(T::one),
                    });
                }
                Action::SetMotor { value } => self.command = Command::Motor { value },
                Action::SetThrust { thrust } => self.command = Command::Thrust { thrust },
                Action::Wait { seconds, jitter } => {
                    let extra = jitter
                        .filter(|j| *j > T::zero())
                        .map(|j| j * T::of(rng.random::<f64>()))
                        .unwrap_or_else(T::zero);
                    let n = ((seconds + extra) / lambda).round().as_f64().max(0.0) as usize;
                    self.block = Some(Block::Steps(n));
                }
                Action::RepeatUntil {
                    condition,
                    body,
                    timelimit,
                } => {
                    self.frames.push(Frame {
                        body,
                        pc: 0,
                        repeat: Some(Repeat {
                            condition,
                            left: timelimit.map(|l| l.saturating_sub(1)),
                            iterations: 0,
                            yielded: false,
                        }),
                    });
                }
            }
        }
        Err(ModeError::Orders("orders made no progress within one step".into()))
    }

    fn mark_yield(&mut self) {
        for f in self.frames.iter_mut() {
            if let Some(r) = f.repeat.as_mut() {
                r.yielded = true;
            }
        }
    }
}
