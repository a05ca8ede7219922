//! Deterministic KDD-format connection streams for tests and demos.
//!
//! Records follow the KDD Cup 1999 layout (41 attributes plus label) so they
//! go through the same parser as real data. Traffic is a mix of several
//! normal-connection profiles with a light sprinkling of isolated attacks,
//! interrupted by scheduled attack episodes. [`Schedule::kdd_like`] places
//! the episodes at the record positions reported for the corrected KDD
//! dataset (a smurf burst over records 7795 to 11489, and so on).

use std::fmt::Write as _;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::kdd::ATTRIBUTES;

/// Kind of traffic emitted for a stretch of records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traffic {
    /// Heterogeneous normal connections with occasional isolated attacks.
    Background,
    /// A single attack type.
    Attack(AttackKind),
    /// Several attack types interleaved with a narrow band of normal traffic.
    MixedAttacks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    Smurf,
    Neptune,
    Back,
    Ipsweep,
    Nmap,
    Satan,
    Portsweep,
    GuessPasswd,
    Teardrop,
}

impl AttackKind {
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::Smurf => "smurf.",
            AttackKind::Neptune => "neptune.",
            AttackKind::Back => "back.",
            AttackKind::Ipsweep => "ipsweep.",
            AttackKind::Nmap => "nmap.",
            AttackKind::Satan => "satan.",
            AttackKind::Portsweep => "portsweep.",
            AttackKind::GuessPasswd => "guess_passwd.",
            AttackKind::Teardrop => "teardrop.",
        }
    }
}

/// Attack episodes over record index ranges; everything else is background.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub total: usize,
    pub episodes: Vec<(Range<usize>, Traffic)>,
}

impl Schedule {
    /// 100,200 records laid out like the head of the corrected KDD file,
    /// with window-denominated episodes mapped through `initial + N * w`
    /// (`initial = 1000`, `N = 200`).
    pub fn kdd_like() -> Self {
        let w = |k: usize| 1000 + 200 * k;
        Schedule {
            total: w(496),
            episodes: vec![
                (7795..11490, Traffic::Attack(AttackKind::Smurf)),
                (w(211)..w(250), Traffic::Attack(AttackKind::Smurf)),
                (w(250)..w(366), Traffic::MixedAttacks),
                (w(453)..w(456), Traffic::Attack(AttackKind::Satan)),
                (w(456)..w(496), Traffic::Attack(AttackKind::Smurf)),
            ],
        }
    }

    /// Only background traffic.
    pub fn background(total: usize) -> Self {
        Schedule {
            total,
            episodes: Vec::new(),
        }
    }

    pub fn traffic_at(&self, idx: usize) -> Traffic {
        self.episodes
            .iter()
            .find(|(r, _)| r.contains(&idx))
            .map_or(Traffic::Background, |(_, t)| *t)
    }
}

/// Line generator; identical seeds give identical streams.
pub struct KddSynth {
    rng: ChaCha8Rng,
    schedule: Schedule,
    next: usize,
}

impl KddSynth {
    pub fn new(schedule: Schedule, seed: u64) -> Self {
        KddSynth {
            rng: ChaCha8Rng::seed_from_u64(seed),
            schedule,
            next: 0,
        }
    }

    /// Writes the whole stream, one record per line.
    pub fn write_all<W: std::io::Write>(mut self, mut out: W) -> std::io::Result<()> {
        for line in &mut self {
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn record(&mut self, traffic: Traffic) -> String {
        let rng = &mut self.rng;
        match traffic {
            Traffic::Background => {
                if rng.random_bool(0.03) {
                    let kind = [
                        AttackKind::Portsweep,
                        AttackKind::GuessPasswd,
                        AttackKind::Teardrop,
                        AttackKind::Neptune,
                        AttackKind::Ipsweep,
                    ][rng.random_range(0..5)];
                    attack(rng, kind)
                } else {
                    normal(rng, false)
                }
            }
            Traffic::Attack(kind) => attack(rng, kind),
            Traffic::MixedAttacks => {
                let u: f64 = rng.random();
                if u < 0.45 {
                    attack(rng, AttackKind::Neptune)
                } else if u < 0.6 {
                    attack(rng, AttackKind::Back)
                } else if u < 0.7 {
                    attack(rng, AttackKind::Ipsweep)
                } else if u < 0.75 {
                    attack(rng, AttackKind::Nmap)
                } else {
                    normal(rng, true)
                }
            }
        }
    }
}

impl Iterator for KddSynth {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        if self.next >= self.schedule.total {
            return None;
        }
        let traffic = self.schedule.traffic_at(self.next);
        self.next += 1;
        Some(self.record(traffic))
    }
}

/// 41 attribute slots with symbolic defaults.
struct Fields([String; 41]);

impl Fields {
    fn new(protocol: &str, service: &str, flag: &str) -> Self {
        let mut f: [String; 41] = std::array::from_fn(|_| "0".to_string());
        f[1] = protocol.into();
        f[2] = service.into();
        f[3] = flag.into();
        Fields(f)
    }

    fn set(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        let idx = ATTRIBUTES
            .iter()
            .position(|a| *a == name)
            .unwrap_or_else(|| panic!("unknown attribute {name}"));
        self.0[idx] = value.to_string();
        self
    }

    fn rate(&mut self, name: &str, value: f64) -> &mut Self {
        self.set(name, format!("{:.2}", value.clamp(0.0, 1.0)))
    }

    fn finish(&self, label: &str) -> String {
        let mut s = String::with_capacity(200);
        for f in &self.0 {
            s.push_str(f);
            s.push(',');
        }
        write!(s, "{label}").expect("writing to a String");
        s
    }
}

fn lognormal(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> u64 {
    LogNormal::new(median.ln(), sigma)
        .expect("valid log-normal")
        .sample(rng)
        .round() as u64
}

/// A normal connection. `narrow` draws from a single tight profile.
fn normal(rng: &mut ChaCha8Rng, narrow: bool) -> String {
    let profile = if narrow { 0 } else { rng.random_range(0..5) };
    let mut f = match profile {
        0 => {
            let mut f = Fields::new("tcp", "http", "SF");
            f.set("src_bytes", lognormal(rng, 230.0, 0.25))
                .set("dst_bytes", lognormal(rng, 2500.0, 0.9))
                .set("logged_in", 1);
            f
        }
        1 => {
            let mut f = Fields::new("tcp", "smtp", "SF");
            f.set("duration", rng.random_range(0..3))
                .set("src_bytes", lognormal(rng, 1100.0, 0.6))
                .set("dst_bytes", lognormal(rng, 330.0, 0.2))
                .set("logged_in", 1);
            f
        }
        2 => {
            let mut f = Fields::new("tcp", "ftp_data", "SF");
            f.set("duration", if rng.random_bool(0.2) { rng.random_range(1..40) } else { 0 })
                .set("src_bytes", lognormal(rng, 2000.0, 1.5))
                .set("logged_in", 1);
            f
        }
        3 => {
            let mut f = Fields::new("udp", "domain_u", "SF");
            f.set("src_bytes", lognormal(rng, 44.0, 0.1))
                .set("dst_bytes", lognormal(rng, 120.0, 0.3));
            f
        }
        _ => {
            let mut f = Fields::new("udp", "private", "SF");
            f.set("src_bytes", lognormal(rng, 105.0, 0.05))
                .set("dst_bytes", lognormal(rng, 105.0, 0.05));
            f
        }
    };
    let count = if narrow {
        rng.random_range(5..12)
    } else {
        rng.random_range(1..60)
    };
    let srv = rng.random_range(1..=count);
    f.set("count", count).set("srv_count", srv);
    if rng.random_bool(0.05) {
        f.set("hot", rng.random_range(1..4));
    }
    if rng.random_bool(0.03) {
        f.rate("rerror_rate", rng.random()).rate("srv_rerror_rate", rng.random());
    }
    let same = if narrow { 1.0 } else { rng.random_range(0.5..=1.0) };
    f.rate("same_srv_rate", same)
        .rate("diff_srv_rate", if same < 1.0 { rng.random_range(0.0..0.2) } else { 0.0 })
        .rate("srv_diff_host_rate", rng.random_range(0.0..0.3));
    let host = if narrow {
        rng.random_range(240..=255)
    } else {
        rng.random_range(1..=255)
    };
    let host_srv = rng.random_range(1..=host);
    f.set("dst_host_count", host)
        .set("dst_host_srv_count", host_srv)
        .rate("dst_host_same_srv_rate", host_srv as f64 / host as f64)
        .rate("dst_host_diff_srv_rate", rng.random_range(0.0..0.1))
        .rate("dst_host_same_src_port_rate", rng.random_range(0.0..0.2))
        .rate("dst_host_srv_diff_host_rate", rng.random_range(0.0..0.1));
    if rng.random_bool(0.02) {
        f.rate("dst_host_serror_rate", rng.random())
            .rate("dst_host_rerror_rate", rng.random());
    }
    f.finish("normal.")
}

fn attack(rng: &mut ChaCha8Rng, kind: AttackKind) -> String {
    let f = match kind {
        AttackKind::Smurf => {
            let mut f = Fields::new("icmp", "ecr_i", "SF");
            let bytes = if rng.random_bool(0.85) { 1032 } else { 520 };
            let count = if rng.random_bool(0.95) { 511 } else { rng.random_range(480..511) };
            f.set("src_bytes", bytes)
                .set("count", count)
                .set("srv_count", count)
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", 255)
                .set("dst_host_srv_count", 255)
                .rate("dst_host_same_srv_rate", 1.0)
                .rate("dst_host_same_src_port_rate", 1.0);
            f
        }
        AttackKind::Neptune => {
            let mut f = Fields::new("tcp", "private", if rng.random_bool(0.9) { "S0" } else { "REJ" });
            let count = rng.random_range(100..300);
            let srv = rng.random_range(5..25);
            f.set("count", count)
                .set("srv_count", srv)
                .rate("serror_rate", 1.0)
                .rate("srv_serror_rate", 1.0)
                .rate("same_srv_rate", srv as f64 / count as f64)
                .rate("diff_srv_rate", 0.06)
                .set("dst_host_count", 255)
                .set("dst_host_srv_count", srv)
                .rate("dst_host_same_srv_rate", srv as f64 / 255.0)
                .rate("dst_host_diff_srv_rate", 0.07)
                .rate("dst_host_serror_rate", 1.0)
                .rate("dst_host_srv_serror_rate", 1.0);
            f
        }
        AttackKind::Back => {
            let mut f = Fields::new("tcp", "http", "SF");
            f.set("src_bytes", 54540)
                .set("dst_bytes", lognormal(rng, 8314.0, 0.05))
                .set("hot", 2)
                .set("logged_in", 1)
                .set("num_compromised", 1)
                .set("count", rng.random_range(1..6))
                .set("srv_count", rng.random_range(1..6))
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", rng.random_range(50..255))
                .set("dst_host_srv_count", 255)
                .rate("dst_host_same_srv_rate", 1.0);
            f
        }
        AttackKind::Ipsweep => {
            let mut f = Fields::new("icmp", "eco_i", "SF");
            let host = rng.random_range(1..60);
            f.set("src_bytes", 8)
                .set("count", rng.random_range(1..3))
                .set("srv_count", rng.random_range(1..40))
                .rate("same_srv_rate", 1.0)
                .rate("srv_diff_host_rate", 1.0)
                .set("dst_host_count", host)
                .set("dst_host_srv_count", host)
                .rate("dst_host_same_srv_rate", 1.0)
                .rate("dst_host_same_src_port_rate", 1.0)
                .rate("dst_host_srv_diff_host_rate", rng.random_range(0.3..0.6));
            f
        }
        AttackKind::Nmap => {
            let mut f = Fields::new("tcp", "private", "SH");
            f.set("count", 1)
                .set("srv_count", 1)
                .rate("serror_rate", 1.0)
                .rate("srv_serror_rate", 1.0)
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", rng.random_range(1..30))
                .set("dst_host_srv_count", 1)
                .rate("dst_host_diff_srv_rate", 1.0)
                .rate("dst_host_same_src_port_rate", 1.0)
                .rate("dst_host_serror_rate", 0.5);
            f
        }
        AttackKind::Satan => {
            let mut f = Fields::new("tcp", "other", "REJ");
            let count = rng.random_range(1..8);
            f.set("count", count)
                .set("srv_count", 1)
                .rate("rerror_rate", 1.0)
                .rate("srv_rerror_rate", 1.0)
                .rate("same_srv_rate", 0.1)
                .rate("diff_srv_rate", 0.9)
                .set("dst_host_count", 255)
                .set("dst_host_srv_count", rng.random_range(1..5))
                .rate("dst_host_diff_srv_rate", 0.9)
                .rate("dst_host_rerror_rate", 0.9)
                .rate("dst_host_srv_rerror_rate", 1.0);
            f
        }
        AttackKind::Portsweep => {
            let mut f = Fields::new("tcp", "private", "REJ");
            f.set("duration", rng.random_range(0..3))
                .set("count", 1)
                .set("srv_count", 1)
                .rate("rerror_rate", 1.0)
                .rate("srv_rerror_rate", 1.0)
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", rng.random_range(1..10))
                .set("dst_host_srv_count", 1)
                .rate("dst_host_diff_srv_rate", 1.0)
                .rate("dst_host_same_src_port_rate", 1.0)
                .rate("dst_host_rerror_rate", 1.0);
            f
        }
        AttackKind::GuessPasswd => {
            let mut f = Fields::new("tcp", "telnet", "RSTO");
            f.set("duration", rng.random_range(1..5))
                .set("src_bytes", 125)
                .set("dst_bytes", 179)
                .set("num_failed_logins", 1)
                .set("count", 1)
                .set("srv_count", 1)
                .rate("rerror_rate", 1.0)
                .rate("srv_rerror_rate", 1.0)
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", rng.random_range(1..255))
                .set("dst_host_srv_count", rng.random_range(1..255))
                .rate("dst_host_rerror_rate", 1.0);
            f
        }
        AttackKind::Teardrop => {
            let mut f = Fields::new("udp", "private", "SF");
            f.set("src_bytes", 28)
                .set("wrong_fragment", 3)
                .set("count", rng.random_range(1..100))
                .set("srv_count", rng.random_range(1..100))
                .rate("same_srv_rate", 1.0)
                .set("dst_host_count", 255)
                .set("dst_host_srv_count", rng.random_range(1..255));
            f
        }
    };
    f.finish(kind.label())
}
