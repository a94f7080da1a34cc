//! Seeded generator of KDD99-shaped connection records.
//!
//! The official KDD99 files cannot be redistributed, so tests, fixtures and
//! demos use this generator as a stand-in. Each raw attack label has a
//! traffic profile modeled on the published descriptions of the attack
//! (protocol, service, flag, byte volumes, host/time window statistics).
//! Profiles deliberately include overlap between categories (failed normal
//! connections that look like scans, warez transfers that look like normal
//! FTP data) so no learner reaches perfect accuracy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::kdd::{
    AttackCategory, CategoryCounts, CategoryMap, Connection, Dataset, FeatureSchema,
    Symbol, Value, FEATURE_COUNT,
};

/// Per-label record counts of the KDD99 10% training file.
pub const KDD99_10_PERCENT_LABELS: &[(&str, usize)] = &[
    ("normal", 97_277),
    ("smurf", 280_790),
    ("neptune", 107_201),
    ("back", 2_203),
    ("teardrop", 979),
    ("pod", 264),
    ("land", 21),
    ("satan", 1_589),
    ("ipsweep", 1_247),
    ("portsweep", 1_040),
    ("nmap", 231),
    ("buffer_overflow", 30),
    ("rootkit", 10),
    ("loadmodule", 9),
    ("perl", 3),
    ("warezclient", 1_020),
    ("guess_passwd", 53),
    ("warezmaster", 20),
    ("imap", 12),
    ("ftp_write", 8),
    ("multihop", 7),
    ("phf", 4),
    ("spy", 2),
];

/// Per-category counts of the bundled 2,000-record fixture.
pub const MINI_FIXTURE_COUNTS: [usize; 5] = [700, 900, 200, 40, 160];

/// Generator seed of the bundled 2,000-record fixture.
pub const MINI_FIXTURE_SEED: u64 = 2000;

pub struct SyntheticCorpus {
    seed: u64,
}

impl SyntheticCorpus {
    pub fn new(seed: u64) -> Self {
        SyntheticCorpus { seed }
    }

    /// Records with the given per-label counts, shuffled.
    pub fn generate_labels(&self, labels: &[(&str, usize)]) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut records = Vec::with_capacity(labels.iter().map(|l| l.1).sum());
        for &(label, n) in labels {
            for _ in 0..n {
                records.push(generate(label, &mut rng));
            }
        }
        records.shuffle(&mut rng);
        Dataset::new(FeatureSchema::kdd99(), records, CategoryMap::kdd99())
            .expect("generated records conform to the KDD99 schema")
    }

    /// Records with the given per-category counts. Within a category, labels
    /// follow their KDD99 10% proportions (largest remainder), except that
    /// every label gets at least one record when the category count allows.
    pub fn generate_counts(&self, counts: CategoryCounts) -> Dataset {
        self.generate_labels(&label_mix(counts))
    }

    /// The records of the bundled 2,000-record fixture.
    pub fn mini_fixture() -> Dataset {
        let [n, d, p, u, r] = MINI_FIXTURE_COUNTS;
        SyntheticCorpus::new(MINI_FIXTURE_SEED).generate_counts(CategoryCounts::new(n, d, p, u, r))
    }

    /// A corpus with the exact per-label counts of the 10% training file.
    pub fn kdd_10_percent(&self) -> Dataset {
        self.generate_labels(KDD99_10_PERCENT_LABELS)
    }
}

/// Splits per-category counts across raw labels.
pub fn label_mix(counts: CategoryCounts) -> Vec<(&'static str, usize)> {
    let map = CategoryMap::kdd99();
    let mut out = Vec::new();
    for c in AttackCategory::ALL {
        let labels: Vec<(&'static str, usize)> = KDD99_10_PERCENT_LABELS
            .iter()
            .copied()
            .filter(|(l, _)| map.category(l).unwrap() == c)
            .collect();
        let n = counts[c];
        let k = labels.len();
        // guarantee one record per label first, then apportion the rest
        let base = if n >= k { 1 } else { 0 };
        let rest = n - base * k;
        let mut per = vec![base; k];
        let weights: Vec<usize> = labels.iter().map(|l| l.1).collect();
        let extra = apportion_vec(rest, &weights);
        for j in 0..k {
            per[j] += extra[j];
        }
        if base == 0 {
            // fewer records than labels: most frequent labels first
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| weights[b].cmp(&weights[a]));
            per = vec![0; k];
            for &j in order.iter().take(n) {
                per[j] = 1;
            }
        }
        out.extend(labels.iter().zip(per).map(|((l, _), m)| (*l, m)));
    }
    out
}

fn apportion_vec(total: usize, weights: &[usize]) -> Vec<usize> {
    // Same largest-remainder rule as `kdd::apportion`, for any length.
    let w_total: u128 = weights.iter().map(|&w| w as u128).sum();
    if w_total == 0 {
        return vec![0; weights.len()];
    }
    let mut out = Vec::with_capacity(weights.len());
    let mut rem = Vec::with_capacity(weights.len());
    for (j, &w) in weights.iter().enumerate() {
        let s = total as u128 * w as u128;
        out.push((s / w_total) as usize);
        rem.push((s % w_total, j));
    }
    let left = total - out.iter().sum::<usize>();
    rem.sort_by(|a, b| b.0.cmp(&a.0));
    for &(_, j) in rem.iter().take(left) {
        out[j] += 1;
    }
    out
}

const DURATION: usize = 0;
const PROTOCOL: usize = 1;
const SERVICE: usize = 2;
const FLAG: usize = 3;
const SRC_BYTES: usize = 4;
const DST_BYTES: usize = 5;
const LAND: usize = 6;
const WRONG_FRAGMENT: usize = 7;
const URGENT: usize = 8;
const HOT: usize = 9;
const FAILED_LOGINS: usize = 10;
const LOGGED_IN: usize = 11;
const COMPROMISED: usize = 12;
const ROOT_SHELL: usize = 13;
const SU_ATTEMPTED: usize = 14;
const NUM_ROOT: usize = 15;
const FILE_CREATIONS: usize = 16;
const SHELLS: usize = 17;
const ACCESS_FILES: usize = 18;
const IS_GUEST: usize = 21;
const COUNT: usize = 22;
const SRV_COUNT: usize = 23;
const SERROR: usize = 24;
const SRV_SERROR: usize = 25;
const RERROR: usize = 26;
const SRV_RERROR: usize = 27;
const SAME_SRV: usize = 28;
const DIFF_SRV: usize = 29;
const SRV_DIFF_HOST: usize = 30;
const DH_COUNT: usize = 31;
const DH_SRV_COUNT: usize = 32;
const DH_SAME_SRV: usize = 33;
const DH_DIFF_SRV: usize = 34;
const DH_SAME_PORT: usize = 35;
const DH_SRV_DIFF_HOST: usize = 36;
const DH_SERROR: usize = 37;
const DH_SRV_SERROR: usize = 38;
const DH_RERROR: usize = 39;
const DH_SRV_RERROR: usize = 40;

const SYMBOLIC: [usize; 7] = [1, 2, 3, 6, 11, 20, 21];

const COMMON_SERVICES: &[&str] = &[
    "private", "http", "smtp", "ftp_data", "ftp", "telnet", "finger", "domain", "auth",
    "eco_i", "ecr_i", "other", "time", "uucp", "courier", "gopher", "whois", "bgp", "ctf",
    "csnet_ns", "discard", "echo", "exec", "login", "imap4", "iso_tsap", "klogin", "kshell",
    "ldap", "link", "mtp", "name", "netbios_dgm", "netbios_ns", "netbios_ssn", "nnsp", "nntp",
    "pop_2", "pop_3", "printer", "remote_job", "rje", "shell", "sql_net", "ssh", "sunrpc",
    "supdup", "systat", "uucp_path", "vmnet", "X11", "Z39_50", "hostnames", "daytime",
    "efs", "netstat", "urp_i", "IRC", "tim_i", "domain_u", "http_443",
];

struct Rec {
    v: [Value; FEATURE_COUNT],
}

impl Rec {
    fn new() -> Self {
        let zero = Value::Continuous(0.0);
        let mut v = [zero; FEATURE_COUNT];
        for i in SYMBOLIC {
            v[i] = Value::Symbolic(Symbol::intern("0"));
        }
        let mut r = Rec { v };
        r.sym(PROTOCOL, "tcp").sym(SERVICE, "http").sym(FLAG, "SF");
        r
    }

    fn num(&mut self, i: usize, x: f64) -> &mut Self {
        self.v[i] = Value::Continuous(x);
        self
    }

    fn rate(&mut self, i: usize, x: f64) -> &mut Self {
        self.num(i, (x.clamp(0.0, 1.0) * 100.0).round() / 100.0)
    }

    fn int(&mut self, i: usize, x: f64) -> &mut Self {
        self.num(i, x.max(0.0).round())
    }

    fn sym(&mut self, i: usize, s: &str) -> &mut Self {
        self.v[i] = Value::Symbolic(Symbol::intern(s));
        self
    }

    fn flag(&mut self, i: usize, on: bool) -> &mut Self {
        self.sym(i, if on { "1" } else { "0" })
    }
}

fn lognormal(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> f64 {
    LogNormal::new(median.ln(), sigma).unwrap().sample(rng)
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = items.iter().map(|i| i.1).sum();
    let mut x = rng.gen::<f64>() * total;
    for (s, w) in items {
        if x < *w {
            return s;
        }
        x -= w;
    }
    items.last().unwrap().0
}

fn jitter(rng: &mut ChaCha8Rng, center: f64, spread: f64) -> f64 {
    center + rng.gen_range(-spread..=spread)
}

/// Host-window statistics shared by many profiles.
fn host_window(r: &mut Rec, dh_count: f64, dh_srv: f64, same_srv: f64, same_port: f64, rng: &mut ChaCha8Rng) {
    r.int(DH_COUNT, dh_count.min(255.0))
        .int(DH_SRV_COUNT, dh_srv.min(255.0))
        .rate(DH_SAME_SRV, same_srv)
        .rate(DH_DIFF_SRV, (1.0 - same_srv) * rng.gen_range(0.0..0.3))
        .rate(DH_SAME_PORT, same_port);
}

fn generate(label: &str, rng: &mut ChaCha8Rng) -> Connection {
    let mut r = Rec::new();
    match label {
        "normal" => normal(&mut r, rng),
        "smurf" => {
            let src = if rng.gen_bool(0.85) { 1032.0 } else { 520.0 };
            let count = if rng.gen_bool(0.8) { 511.0 } else { rng.gen_range(60.0..511.0) };
            r.sym(PROTOCOL, "icmp").sym(SERVICE, "ecr_i").sym(FLAG, "SF");
            r.num(SRC_BYTES, src).int(COUNT, count).int(SRV_COUNT, count);
            r.rate(SAME_SRV, 1.0).rate(SRV_DIFF_HOST, 0.0);
            host_window(&mut r, 255.0, 255.0, 1.0, rng.gen_range(0.9..1.0), rng);
        }
        "neptune" => {
            let service = if rng.gen_bool(0.55) {
                "private"
            } else {
                COMMON_SERVICES[rng.gen_range(0..COMMON_SERVICES.len())]
            };
            let flag = pick(rng, &[("S0", 0.85), ("REJ", 0.12), ("RSTO", 0.03)]);
            let syn = flag == "S0";
            let count = rng.gen_range(80.0..300.0);
            let srv = rng.gen_range(1.0..25.0);
            r.sym(SERVICE, service).sym(FLAG, flag);
            r.int(COUNT, count).int(SRV_COUNT, srv);
            r.rate(SERROR, if syn { 1.0 } else { 0.0 }).rate(SRV_SERROR, if syn { 1.0 } else { 0.0 });
            r.rate(RERROR, if syn { 0.0 } else { 1.0 }).rate(SRV_RERROR, if syn { 0.0 } else { 1.0 });
            r.rate(SAME_SRV, srv / count).rate(DIFF_SRV, rng.gen_range(0.04..0.09));
            host_window(&mut r, 255.0, rng.gen_range(1.0..25.0), rng.gen_range(0.0..0.1), 0.0, rng);
            r.rate(DH_SERROR, if syn { 1.0 } else { 0.0 }).rate(DH_SRV_SERROR, if syn { 1.0 } else { 0.0 });
            r.rate(DH_RERROR, if syn { 0.0 } else { 1.0 }).rate(DH_SRV_RERROR, if syn { 0.0 } else { 1.0 });
        }
        "back" => {
            r.sym(SERVICE, "http").flag(LOGGED_IN, true);
            r.int(SRC_BYTES, jitter(rng, 54540.0, 400.0)).int(DST_BYTES, jitter(rng, 8314.0, 2000.0));
            r.int(HOT, 2.0).int(COMPROMISED, 1.0);
            let c = rng.gen_range(1.0..10.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(&mut r, rng.gen_range(50.0..255.0), 255.0, 1.0, rng.gen_range(0.0..0.05), rng);
        }
        "teardrop" => {
            r.sym(PROTOCOL, "udp").sym(SERVICE, "private");
            r.num(SRC_BYTES, 28.0).num(WRONG_FRAGMENT, 3.0);
            let c = rng.gen_range(20.0..110.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(&mut r, 255.0, rng.gen_range(20.0..120.0), rng.gen_range(0.1..0.5), rng.gen_range(0.0..0.1), rng);
        }
        "pod" => {
            r.sym(PROTOCOL, "icmp").sym(SERVICE, if rng.gen_bool(0.9) { "ecr_i" } else { "tim_i" });
            r.num(SRC_BYTES, 1480.0).num(WRONG_FRAGMENT, 1.0);
            let c = rng.gen_range(1.0..20.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(&mut r, rng.gen_range(1.0..100.0), rng.gen_range(1.0..100.0), 1.0, 1.0, rng);
        }
        "land" => {
            r.sym(SERVICE, pick(rng, &[("finger", 0.3), ("telnet", 0.3), ("private", 0.4)]));
            r.sym(FLAG, "S0").flag(LAND, true);
            r.int(COUNT, 1.0).int(SRV_COUNT, 1.0).rate(SERROR, 1.0).rate(SRV_SERROR, 1.0).rate(SAME_SRV, 1.0);
            host_window(&mut r, rng.gen_range(1.0..5.0), rng.gen_range(1.0..5.0), 1.0, 1.0, rng);
            r.rate(DH_SERROR, 1.0).rate(DH_SRV_SERROR, 1.0);
        }
        "satan" => {
            let service = COMMON_SERVICES[rng.gen_range(0..COMMON_SERVICES.len())];
            let flag = pick(rng, &[("REJ", 0.55), ("S0", 0.15), ("RSTO", 0.1), ("SF", 0.15), ("SH", 0.05)]);
            r.sym(SERVICE, service).sym(FLAG, flag);
            if flag == "SF" {
                r.int(SRC_BYTES, rng.gen_range(0.0..60.0)).int(DST_BYTES, rng.gen_range(0.0..300.0));
            }
            let c = rng.gen_range(1.0..15.0);
            r.int(COUNT, c).int(SRV_COUNT, rng.gen_range(1.0..c + 1.0));
            r.rate(RERROR, if flag == "REJ" { rng.gen_range(0.5..1.0) } else { rng.gen_range(0.0..0.3) });
            r.rate(SRV_RERROR, if flag == "REJ" { rng.gen_range(0.5..1.0) } else { 0.0 });
            r.rate(SAME_SRV, rng.gen_range(0.0..0.4)).rate(DIFF_SRV, rng.gen_range(0.4..1.0));
            host_window(&mut r, 255.0, rng.gen_range(1.0..15.0), rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1), rng);
            r.rate(DH_DIFF_SRV, rng.gen_range(0.5..1.0));
            r.rate(DH_RERROR, rng.gen_range(0.4..1.0)).rate(DH_SRV_RERROR, rng.gen_range(0.3..1.0));
        }
        "ipsweep" => {
            let icmp = rng.gen_bool(0.9);
            r.sym(PROTOCOL, if icmp { "icmp" } else { "tcp" });
            r.sym(SERVICE, if icmp { "eco_i" } else { "private" });
            r.sym(FLAG, if icmp { "SF" } else { "REJ" });
            r.num(SRC_BYTES, if icmp { pick(rng, &[("8", 0.6), ("18", 0.4)]).parse().unwrap() } else { 0.0 });
            r.int(COUNT, rng.gen_range(1.0..4.0)).int(SRV_COUNT, rng.gen_range(1.0..40.0));
            r.rate(SAME_SRV, 1.0).rate(SRV_DIFF_HOST, rng.gen_range(0.5..1.0));
            host_window(&mut r, rng.gen_range(1.0..60.0), rng.gen_range(20.0..150.0), 1.0, 1.0, rng);
            r.rate(DH_SRV_DIFF_HOST, rng.gen_range(0.3..0.8));
        }
        "portsweep" => {
            r.sym(SERVICE, if rng.gen_bool(0.8) { "private" } else { COMMON_SERVICES[rng.gen_range(0..COMMON_SERVICES.len())] });
            r.sym(FLAG, pick(rng, &[("REJ", 0.45), ("RSTR", 0.45), ("SF", 0.05), ("S0", 0.05)]));
            r.num(DURATION, if rng.gen_bool(0.2) { rng.gen_range(1.0f64..20_000.0).round() } else { 0.0 });
            r.int(COUNT, rng.gen_range(1.0..4.0)).int(SRV_COUNT, rng.gen_range(1.0..4.0));
            r.rate(RERROR, rng.gen_range(0.5..1.0)).rate(SRV_RERROR, rng.gen_range(0.5..1.0));
            r.rate(SAME_SRV, rng.gen_range(0.5..1.0)).rate(SRV_DIFF_HOST, rng.gen_range(0.0..0.5));
            host_window(&mut r, rng.gen_range(1.0..255.0), rng.gen_range(1.0..10.0), rng.gen_range(0.0..0.3), 1.0, rng);
            r.rate(DH_RERROR, rng.gen_range(0.5..1.0)).rate(DH_SRV_RERROR, rng.gen_range(0.5..1.0));
        }
        "nmap" => {
            let proto = pick(rng, &[("icmp", 0.4), ("tcp", 0.4), ("udp", 0.2)]);
            r.sym(PROTOCOL, proto);
            r.sym(SERVICE, if proto == "icmp" { "eco_i" } else { "private" });
            r.sym(FLAG, if proto == "tcp" { pick(rng, &[("SH", 0.5), ("S0", 0.3), ("REJ", 0.2)]) } else { "SF" });
            r.int(SRC_BYTES, if proto == "tcp" { 0.0 } else { rng.gen_range(0.0..30.0) });
            r.int(COUNT, rng.gen_range(1.0..3.0)).int(SRV_COUNT, rng.gen_range(1.0..30.0));
            r.rate(SAME_SRV, 1.0).rate(SRV_DIFF_HOST, rng.gen_range(0.0..1.0));
            host_window(&mut r, rng.gen_range(1.0..255.0), rng.gen_range(1.0..40.0), rng.gen_range(0.2..1.0), rng.gen_range(0.5..1.0), rng);
            r.rate(DH_SRV_DIFF_HOST, rng.gen_range(0.0..0.6));
        }
        "buffer_overflow" | "rootkit" | "loadmodule" | "perl" => u2r(label, &mut r, rng),
        _ => r2l(label, &mut r, rng),
    }
    Connection::new(r.v.to_vec(), Some(label)).expect("generated record is well formed")
}

fn normal(r: &mut Rec, rng: &mut ChaCha8Rng) {
    let kind = pick(
        rng,
        &[
            ("http", 0.50),
            ("smtp", 0.10),
            ("ftp_data", 0.09),
            ("domain_u", 0.11),
            ("private_udp", 0.06),
            ("ftp", 0.02),
            ("telnet", 0.015),
            ("ecr_i", 0.03),
            ("other", 0.025),
            ("failed", 0.03),
            ("burst", 0.02),
        ],
    );
    let dh_count = rng.gen_range(1.0..256.0);
    match kind {
        "http" => {
            r.sym(SERVICE, "http").flag(LOGGED_IN, true);
            r.sym(FLAG, pick(rng, &[("SF", 0.97), ("RSTO", 0.01), ("S1", 0.01), ("RSTR", 0.01)]));
            r.int(SRC_BYTES, lognormal(rng, 240.0, 0.5)).int(DST_BYTES, lognormal(rng, 2500.0, 1.3));
            let c = rng.gen_range(1.0..35.0);
            r.int(COUNT, c).int(SRV_COUNT, c + rng.gen_range(0.0..10.0)).rate(SAME_SRV, 1.0);
            r.rate(SRV_DIFF_HOST, rng.gen_range(0.0..0.3));
            host_window(r, dh_count, 255.0, 1.0, rng.gen_range(0.0..0.1), rng);
        }
        "smtp" => {
            r.sym(SERVICE, "smtp").flag(LOGGED_IN, true);
            r.num(DURATION, rng.gen_range(0.0f64..5.0).round());
            r.int(SRC_BYTES, lognormal(rng, 1100.0, 0.9)).int(DST_BYTES, lognormal(rng, 330.0, 0.2));
            r.int(COUNT, rng.gen_range(1.0..4.0)).int(SRV_COUNT, rng.gen_range(1.0..20.0)).rate(SAME_SRV, 1.0);
            host_window(r, dh_count, rng.gen_range(1.0..255.0), rng.gen_range(0.3..1.0), rng.gen_range(0.0..0.1), rng);
        }
        "ftp_data" => {
            r.sym(SERVICE, "ftp_data").flag(LOGGED_IN, rng.gen_bool(0.7));
            r.int(SRC_BYTES, lognormal(rng, 1500.0, 2.0)).int(DST_BYTES, if rng.gen_bool(0.7) { 0.0 } else { lognormal(rng, 2000.0, 1.5) });
            r.int(COUNT, rng.gen_range(1.0..10.0)).int(SRV_COUNT, rng.gen_range(1.0..10.0)).rate(SAME_SRV, 1.0);
            host_window(r, dh_count, rng.gen_range(1.0..255.0), rng.gen_range(0.2..1.0), rng.gen_range(0.0..1.0), rng);
        }
        "domain_u" => {
            r.sym(PROTOCOL, "udp").sym(SERVICE, "domain_u");
            r.int(SRC_BYTES, rng.gen_range(28.0..55.0)).int(DST_BYTES, rng.gen_range(28.0..200.0));
            let c = rng.gen_range(1.0..200.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(r, dh_count, 255.0, 1.0, rng.gen_range(0.0..0.05), rng);
        }
        "private_udp" => {
            r.sym(PROTOCOL, "udp").sym(SERVICE, pick(rng, &[("private", 0.7), ("ntp_u", 0.3)]));
            r.int(SRC_BYTES, rng.gen_range(20.0..150.0)).int(DST_BYTES, rng.gen_range(0.0..150.0));
            let c = rng.gen_range(1.0..120.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(r, dh_count, rng.gen_range(1.0..255.0), rng.gen_range(0.5..1.0), rng.gen_range(0.0..1.0), rng);
        }
        "ftp" | "telnet" => {
            r.sym(SERVICE, kind).flag(LOGGED_IN, true);
            r.num(DURATION, lognormal(rng, 40.0, 1.5).round());
            r.int(SRC_BYTES, lognormal(rng, 400.0, 1.0)).int(DST_BYTES, lognormal(rng, 1500.0, 1.2));
            r.int(HOT, if rng.gen_bool(0.3) { rng.gen_range(0.0..3.0) } else { 0.0 });
            r.int(FILE_CREATIONS, if rng.gen_bool(0.05) { 1.0 } else { 0.0 });
            r.int(ACCESS_FILES, if rng.gen_bool(0.05) { 1.0 } else { 0.0 });
            r.int(COUNT, 1.0).int(SRV_COUNT, rng.gen_range(1.0..3.0)).rate(SAME_SRV, 1.0);
            host_window(r, dh_count, rng.gen_range(1.0..60.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.3), rng);
        }
        "ecr_i" => {
            r.sym(PROTOCOL, "icmp").sym(SERVICE, pick(rng, &[("ecr_i", 0.6), ("eco_i", 0.3), ("urp_i", 0.1)]));
            r.int(SRC_BYTES, pick(rng, &[("30", 0.4), ("1032", 0.15), ("520", 0.05), ("64", 0.4)]).parse().unwrap());
            let c = rng.gen_range(1.0..6.0);
            r.int(COUNT, c).int(SRV_COUNT, c).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..40.0), rng.gen_range(1.0..40.0), 1.0, rng.gen_range(0.3..1.0), rng);
        }
        "other" => {
            let service = COMMON_SERVICES[rng.gen_range(0..COMMON_SERVICES.len())];
            r.sym(SERVICE, service).flag(LOGGED_IN, rng.gen_bool(0.5));
            r.int(SRC_BYTES, lognormal(rng, 150.0, 1.5)).int(DST_BYTES, lognormal(rng, 200.0, 2.0));
            r.int(COUNT, rng.gen_range(1.0..20.0)).int(SRV_COUNT, rng.gen_range(1.0..20.0));
            r.rate(SAME_SRV, rng.gen_range(0.3..1.0)).rate(DIFF_SRV, rng.gen_range(0.0..0.3));
            host_window(r, dh_count, rng.gen_range(1.0..255.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng);
        }
        "failed" => {
            // refused or reset connections; resembles low-rate scanning
            r.sym(SERVICE, pick(rng, &[("http", 0.4), ("private", 0.3), ("auth", 0.15), ("smtp", 0.15)]));
            r.sym(FLAG, pick(rng, &[("REJ", 0.6), ("RSTR", 0.2), ("S0", 0.2)]));
            r.int(COUNT, rng.gen_range(1.0..10.0)).int(SRV_COUNT, rng.gen_range(1.0..10.0));
            r.rate(RERROR, rng.gen_range(0.0..1.0)).rate(SRV_RERROR, rng.gen_range(0.0..1.0));
            r.rate(SAME_SRV, rng.gen_range(0.2..1.0)).rate(DIFF_SRV, rng.gen_range(0.0..0.6));
            host_window(r, dh_count, rng.gen_range(1.0..80.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng);
            r.rate(DH_RERROR, rng.gen_range(0.0..0.8));
        }
        _ => {
            // heavy legitimate bursts to one service
            r.sym(SERVICE, pick(rng, &[("http", 0.5), ("private", 0.3), ("domain_u", 0.2)]));
            let c = rng.gen_range(100.0..400.0);
            r.int(SRC_BYTES, lognormal(rng, 300.0, 0.8)).int(DST_BYTES, lognormal(rng, 800.0, 1.0));
            r.int(COUNT, c).int(SRV_COUNT, c * rng.gen_range(0.5..1.0)).rate(SAME_SRV, rng.gen_range(0.5..1.0));
            host_window(r, 255.0, 255.0, rng.gen_range(0.6..1.0), rng.gen_range(0.0..0.3), rng);
        }
    }
}

fn u2r(label: &str, r: &mut Rec, rng: &mut ChaCha8Rng) {
    let service = match label {
        "buffer_overflow" => pick(rng, &[("telnet", 0.7), ("ftp_data", 0.3)]),
        "rootkit" => pick(rng, &[("telnet", 0.5), ("ftp_data", 0.3), ("private", 0.2)]),
        "loadmodule" => pick(rng, &[("telnet", 0.8), ("ftp_data", 0.2)]),
        _ => "telnet",
    };
    r.sym(SERVICE, service).flag(LOGGED_IN, true);
    if service == "private" {
        r.sym(PROTOCOL, "udp").flag(LOGGED_IN, false);
    }
    r.num(DURATION, lognormal(rng, 90.0, 1.0).round());
    r.int(SRC_BYTES, lognormal(rng, 1600.0, 0.8)).int(DST_BYTES, lognormal(rng, 4000.0, 1.2));
    r.int(HOT, rng.gen_range(1.0..4.0)).int(COMPROMISED, rng.gen_range(0.0..3.0));
    r.int(ROOT_SHELL, if rng.gen_bool(0.7) { 1.0 } else { 0.0 });
    r.int(NUM_ROOT, if label == "perl" { rng.gen_range(1.0..5.0) } else { rng.gen_range(0.0..2.0) });
    r.int(FILE_CREATIONS, rng.gen_range(0.0..3.0)).int(SHELLS, if rng.gen_bool(0.3) { 1.0 } else { 0.0 });
    r.int(SU_ATTEMPTED, 0.0).int(URGENT, 0.0);
    r.int(COUNT, 1.0).int(SRV_COUNT, 1.0).rate(SAME_SRV, 1.0);
    host_window(r, rng.gen_range(1.0..30.0), rng.gen_range(1.0..10.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5), rng);
}

fn r2l(label: &str, r: &mut Rec, rng: &mut ChaCha8Rng) {
    match label {
        "warezclient" => {
            // often indistinguishable from ordinary ftp_data downloads
            r.sym(SERVICE, pick(rng, &[("ftp_data", 0.75), ("ftp", 0.25)])).flag(LOGGED_IN, true);
            r.flag(IS_GUEST, rng.gen_bool(0.5));
            r.num(DURATION, lognormal(rng, 20.0, 2.0).round());
            r.int(SRC_BYTES, lognormal(rng, 20000.0, 2.0)).int(DST_BYTES, if rng.gen_bool(0.8) { 0.0 } else { lognormal(rng, 3000.0, 1.0) });
            r.int(HOT, if rng.gen_bool(0.4) { rng.gen_range(0.0..28.0) } else { 0.0 });
            r.int(COUNT, rng.gen_range(1.0..5.0)).int(SRV_COUNT, rng.gen_range(1.0..5.0)).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..255.0), rng.gen_range(1.0..120.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng);
        }
        "guess_passwd" => {
            r.sym(SERVICE, "telnet").sym(FLAG, pick(rng, &[("RSTO", 0.7), ("SF", 0.3)]));
            r.int(SRC_BYTES, jitter(rng, 125.0, 4.0)).int(DST_BYTES, jitter(rng, 179.0, 10.0));
            r.int(FAILED_LOGINS, 1.0).int(HOT, if rng.gen_bool(0.2) { 1.0 } else { 0.0 });
            r.int(COUNT, rng.gen_range(1.0..3.0)).int(SRV_COUNT, rng.gen_range(1.0..3.0)).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..60.0), rng.gen_range(1.0..60.0), 1.0, rng.gen_range(0.0..0.1), rng);
            r.rate(DH_RERROR, rng.gen_range(0.0..0.5));
        }
        "warezmaster" => {
            r.sym(SERVICE, "ftp").flag(LOGGED_IN, true).flag(IS_GUEST, true);
            r.num(DURATION, lognormal(rng, 300.0, 1.0).round());
            r.int(SRC_BYTES, lognormal(rng, 300.0, 1.0)).int(DST_BYTES, lognormal(rng, 2_000_000.0, 1.0));
            r.int(HOT, rng.gen_range(0.0..5.0));
            r.int(COUNT, 1.0).int(SRV_COUNT, 1.0).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..20.0), rng.gen_range(1.0..20.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5), rng);
        }
        "imap" => {
            r.sym(SERVICE, "imap4").sym(FLAG, pick(rng, &[("SF", 0.4), ("S0", 0.2), ("RSTO", 0.2), ("SH", 0.2)]));
            r.int(SRC_BYTES, lognormal(rng, 1500.0, 0.5)).int(DST_BYTES, lognormal(rng, 400.0, 1.0));
            r.int(COUNT, rng.gen_range(1.0..4.0)).int(SRV_COUNT, rng.gen_range(1.0..4.0)).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..20.0), rng.gen_range(1.0..20.0), 1.0, rng.gen_range(0.0..1.0), rng);
        }
        "phf" => {
            r.sym(SERVICE, "http").flag(LOGGED_IN, true);
            r.int(SRC_BYTES, jitter(rng, 51.0, 2.0)).int(DST_BYTES, jitter(rng, 8127.0, 20.0));
            r.int(HOT, 0.0).int(COUNT, 1.0).int(SRV_COUNT, 1.0).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0), 1.0, 0.0, rng);
        }
        _ => {
            // ftp_write, multihop, spy: long interactive sessions
            r.sym(SERVICE, pick(rng, &[("ftp", 0.4), ("telnet", 0.4), ("ftp_data", 0.2)])).flag(LOGGED_IN, true);
            r.num(DURATION, lognormal(rng, if label == "spy" { 20_000.0 } else { 200.0 }, 1.0).round());
            r.int(SRC_BYTES, lognormal(rng, 800.0, 1.2)).int(DST_BYTES, lognormal(rng, 2500.0, 1.5));
            r.int(HOT, rng.gen_range(0.0..5.0)).int(FILE_CREATIONS, rng.gen_range(0.0..3.0));
            r.int(ACCESS_FILES, rng.gen_range(0.0..2.0));
            r.int(COUNT, 1.0).int(SRV_COUNT, 1.0).rate(SAME_SRV, 1.0);
            host_window(r, rng.gen_range(1.0..20.0), rng.gen_range(1.0..20.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5), rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_percent_mix_matches_published_counts() {
        let total: usize = KDD99_10_PERCENT_LABELS.iter().map(|l| l.1).sum();
        assert_eq!(total, 494_020);
        let map = CategoryMap::kdd99();
        let mut counts = CategoryCounts::default();
        for (l, n) in KDD99_10_PERCENT_LABELS {
            counts[map.category(l).unwrap()] += n;
        }
        assert_eq!(counts, CategoryCounts::new(97_277, 391_458, 4_107, 52, 1_126));
    }

    #[test]
    fn label_mix_preserves_category_counts() {
        for counts in [
            CategoryCounts::new(700, 900, 200, 40, 160),
            CategoryCounts::new(3, 2, 1, 0, 5),
            CategoryCounts::default(),
        ] {
            let mix = label_mix(counts);
            let map = CategoryMap::kdd99();
            let mut got = CategoryCounts::default();
            for (l, n) in &mix {
                got[map.category(l).unwrap()] += n;
            }
            assert_eq!(got, counts);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let c = CategoryCounts::new(20, 20, 10, 4, 8);
        let a = SyntheticCorpus::new(5).generate_counts(c);
        let b = SyntheticCorpus::new(5).generate_counts(c);
        assert_eq!(a.records(), b.records());
        assert_eq!(a.category_counts(), c);
        let d = SyntheticCorpus::new(6).generate_counts(c);
        assert_ne!(a.records(), d.records());
    }
}
