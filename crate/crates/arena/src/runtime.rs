//! External agents as child processes: protocol text over stdin/stdout,
//! stderr to a log file, wall-clock turn budgets and sampled memory limits.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use locm_core::referee::{Forfeit, Response, Seat, SeatTurn};
use locm_core::state::EndReason;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub mem_soft_bytes: u64,
    pub mem_hard_bytes: u64,
    /// Also cap the address space with `RLIMIT_AS` at the hard limit.
    pub os_hard_limit: bool,
    pub sample_period: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            mem_soft_bytes: 256 << 20,
            mem_hard_bytes: 1024 << 20,
            os_hard_limit: false,
            sample_period: Duration::from_millis(50),
        }
    }
}

impl Limits {
    pub fn from_config(config: &locm_core::RulesetConfig) -> Self {
        Limits { mem_soft_bytes: config.mem_soft_bytes, mem_hard_bytes: config.mem_hard_bytes, ..Limits::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Crashed,
    TimedOut,
    Disqualified,
    Exited,
}

#[derive(Debug, thiserror::Error)]
pub enum SpawnError {
    #[error("empty agent command")]
    Empty,
    #[error("cannot split agent command {0:?}")]
    BadQuoting(String),
    #[error("cannot start {command:?}: {source}")]
    Start { command: String, source: std::io::Error },
    #[error("cannot create log file {path}: {source}")]
    Log { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("no complete line within {0:?}")]
    Timeout(Duration),
    #[error("agent crashed: {0}")]
    Crash(String),
    #[error("resident memory {0} bytes reached the hard limit")]
    Disqualified(u64),
    #[error("agent is no longer running ({0:?})")]
    NotRunning(Status),
}

impl MoveError {
    pub fn end_reason(&self) -> EndReason {
        match self {
            MoveError::Timeout(_) => EndReason::Timeout,
            MoveError::Disqualified(_) => EndReason::Disqualified,
            MoveError::Crash(_) | MoveError::NotRunning(_) => EndReason::Crash,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemoryCheck {
    Ok(u64),
    SoftExceeded(u64),
    Disqualified(u64),
}

enum Io {
    Flushed,
    Line(String),
    Eof,
    WriteFailed(String),
}

/// Resident set size of a live process, from `/proc/<pid>/status`.
pub fn resident_bytes(pid: u32) -> Option<u64> {
    let status = std::fs::read_to_string(format!("/proc/{pid}/status")).ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Log file for an agent's stderr: `<root>/<match>/<agent>.stderr.txt`, with
/// the root taken from `LOCM_LOG_DIR` when set.
pub fn stderr_log_path(root: Option<&Path>, match_id: &str, agent: &str) -> PathBuf {
    let root = match (root, std::env::var_os("LOCM_LOG_DIR")) {
        (_, Some(env)) => PathBuf::from(env),
        (Some(r), None) => r.to_path_buf(),
        (None, None) => PathBuf::from("logs"),
    };
    let safe: String = agent
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .take(64)
        .collect();
    root.join(match_id).join(format!("{safe}.stderr.txt"))
}

pub struct AgentProcess {
    command: String,
    child: Child,
    pid: u32,
    status: Status,
    input: Option<Sender<Vec<u8>>>,
    events: Receiver<Io>,
    limits: Limits,
    pub soft_warnings: u32,
    pub peak_rss: u64,
}

fn writer(mut stdin: ChildStdin, jobs: Receiver<Vec<u8>>, events: Sender<Io>) {
    for job in jobs {
        let result = stdin.write_all(&job).and_then(|_| stdin.flush());
        let msg = match result {
            Ok(()) => Io::Flushed,
            Err(e) => Io::WriteFailed(e.to_string()),
        };
        if events.send(msg).is_err() {
            return;
        }
    }
}

fn reader(stdout: impl std::io::Read, events: Sender<Io>) {
    let mut out = BufReader::new(stdout);
    loop {
        let mut line = Vec::new();
        match out.read_until(b'\n', &mut line) {
            Ok(0) | Err(_) => {
                let _ = events.send(Io::Eof);
                return;
            }
            Ok(_) if line.last() != Some(&b'\n') => {
                let _ = events.send(Io::Eof);
                return;
            }
            Ok(_) => {
                let text = String::from_utf8_lossy(&line).into_owned();
                if events.send(Io::Line(text)).is_err() {
                    return;
                }
            }
        }
    }
}

impl AgentProcess {
    /// Starts `command` (split with shell quoting rules, not run through a
    /// shell). Stderr goes to `stderr_log` or is discarded.
    pub fn spawn(command: &str, stderr_log: Option<&Path>, limits: Limits) -> Result<Self, SpawnError> {
        let argv = shlex::split(command).ok_or_else(|| SpawnError::BadQuoting(command.to_string()))?;
        let (program, args) = argv.split_first().ok_or(SpawnError::Empty)?;
        let stderr = match stderr_log {
            Some(path) => {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir).map_err(|source| SpawnError::Log { path: path.into(), source })?;
                }
                Stdio::from(File::create(path).map_err(|source| SpawnError::Log { path: path.into(), source })?)
            }
            None => Stdio::null(),
        };
        use std::os::unix::process::CommandExt;
        let mut cmd = Command::new(program);
        // Own process group, so helpers the agent starts die with it.
        cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(stderr).process_group(0);
        if limits.os_hard_limit {
            let cap = limits.mem_hard_bytes as libc::rlim_t;
            // SAFETY: setrlimit is async-signal-safe and touches no parent state.
            unsafe {
                cmd.pre_exec(move || {
                    let lim = libc::rlimit { rlim_cur: cap, rlim_max: cap };
                    if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                        return Err(std::io::Error::last_os_error());
                    }
                    Ok(())
                });
            }
        }
        let mut child = cmd.spawn().map_err(|source| SpawnError::Start { command: command.to_string(), source })?;
        let pid = child.id();
        let (ev_tx, ev_rx) = mpsc::channel();
        let (in_tx, in_rx) = mpsc::channel::<Vec<u8>>();
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let tx = ev_tx.clone();
        thread::spawn(move || writer(stdin, in_rx, tx));
        thread::spawn(move || reader(stdout, ev_tx));
        Ok(AgentProcess {
            command: command.to_string(),
            child,
            pid,
            status: Status::Running,
            input: Some(in_tx),
            events: ev_rx,
            limits,
            soft_warnings: 0,
            peak_rss: 0,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn pid(&self) -> u32 {
        self.pid
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// Samples resident memory. Reaching the hard limit disqualifies and
    /// kills the agent. An unreadable sample counts as fine.
    pub fn check_memory(&mut self) -> MemoryCheck {
        let Some(rss) = resident_bytes(self.pid) else {
            return MemoryCheck::Ok(0);
        };
        self.peak_rss = self.peak_rss.max(rss);
        if rss >= self.limits.mem_hard_bytes {
            self.terminate(Status::Disqualified);
            MemoryCheck::Disqualified(rss)
        } else if rss >= self.limits.mem_soft_bytes {
            self.soft_warnings += 1;
            MemoryCheck::SoftExceeded(rss)
        } else {
            MemoryCheck::Ok(rss)
        }
    }

    /// Sends one turn input and waits for one complete output line. The
    /// budget runs from the moment the input is fully flushed.
    pub fn request_move(&mut self, input: &str, budget: Duration) -> Result<String, MoveError> {
        if self.status != Status::Running {
            return Err(MoveError::NotRunning(self.status));
        }
        // Lines left over from earlier turns are not answers to this one.
        loop {
            match self.events.try_recv() {
                Ok(Io::Line(_)) | Ok(Io::Flushed) => {}
                Ok(Io::Eof) | Err(mpsc::TryRecvError::Disconnected) => return Err(self.crashed("output closed")),
                Ok(Io::WriteFailed(e)) => return Err(self.crashed(&e)),
                Err(mpsc::TryRecvError::Empty) => break,
            }
        }
        let sent = Instant::now();
        if self.input.as_ref().map_or(true, |tx| tx.send(input.as_bytes().to_vec()).is_err()) {
            return Err(self.crashed("input closed"));
        }
        let mut deadline = sent + budget;
        let mut flushed = false;
        loop {
            let now = Instant::now();
            if now >= deadline {
                self.terminate(Status::TimedOut);
                return Err(MoveError::Timeout(budget));
            }
            let wait = (deadline - now).min(self.limits.sample_period);
            match self.events.recv_timeout(wait) {
                Ok(Io::Line(line)) => return Ok(line.trim_end_matches(['\r', '\n']).to_string()),
                Ok(Io::Flushed) if !flushed => {
                    flushed = true;
                    deadline = Instant::now() + budget;
                }
                Ok(Io::Flushed) => {}
                Ok(Io::Eof) => return Err(self.crashed("exited without answering")),
                Ok(Io::WriteFailed(e)) => return Err(self.crashed(&e)),
                Err(RecvTimeoutError::Disconnected) => return Err(self.crashed("output closed")),
                Err(RecvTimeoutError::Timeout) => {}
            }
            if let MemoryCheck::Disqualified(rss) = self.check_memory() {
                return Err(MoveError::Disqualified(rss));
            }
        }
    }

    fn crashed(&mut self, why: &str) -> MoveError {
        let detail = match self.child.try_wait() {
            Ok(Some(status)) => format!("{why} ({status})"),
            _ => why.to_string(),
        };
        self.terminate(Status::Crashed);
        MoveError::Crash(detail)
    }

    fn terminate(&mut self, status: Status) {
        self.input = None;
        // SAFETY: plain syscall; the group id is our child's pid.
        unsafe {
            libc::kill(-(self.pid as libc::pid_t), libc::SIGKILL);
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
        if self.status == Status::Running {
            self.status = status;
        }
    }

    /// Closes stdin, gives the agent a moment to exit, then kills and reaps it.
    pub fn shutdown(&mut self) {
        self.input = None;
        let until = Instant::now() + Duration::from_millis(100);
        while Instant::now() < until {
            if let Ok(Some(_)) = self.child.try_wait() {
                break;
            }
            thread::sleep(Duration::from_millis(5));
        }
        self.terminate(Status::Exited);
    }
}

impl Drop for AgentProcess {
    fn drop(&mut self) {
        self.terminate(Status::Exited);
    }
}

/// A seat played by an external process.
pub struct ProcessSeat {
    pub name: String,
    pub process: AgentProcess,
}

impl Seat for ProcessSeat {
    fn name(&self) -> &str {
        &self.name
    }

    fn respond(&mut self, turn: &SeatTurn<'_>) -> Result<Response, Forfeit> {
        match self.process.request_move(&turn.view.render(), turn.budget) {
            Ok(line) => Ok(Response::Text(line)),
            Err(e) => Err(Forfeit { reason: e.end_reason(), detail: e.to_string() }),
        }
    }
}
