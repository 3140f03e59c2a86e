#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Value,
    Flag,
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn value(name: &'static str, default: Option<&'static str>, help: &'static str) -> Param {
    Param { name, kind: ParamKind::Value, default, help }
}

const fn flag(name: &'static str, help: &'static str) -> Param {
    Param { name, kind: ParamKind::Flag, default: None, help }
}

const INSTANCE: [Param; 6] = [
    value("instance", None, "system instance JSON file (replaces --psi --phi --rho --J --I)"),
    value("psi", None, "accuracy family: power:c,sigma | const:c | table:v1;v2;..."),
    value("phi", Some("zero"), "perturbation: zero | sin:kappa,delta | psshift:a,kappa"),
    value("rho", Some("none"), "twist: none | power:gamma,alpha | power-t:gamma,a"),
    value("J", Some("0,1"), "open interval of theta, lo,hi"),
    value("I", Some("0,1"), "target interval [lo,hi) for the twist"),
];

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub params: Vec<Param>,
}

fn with_instance(extra: &[Param]) -> Vec<Param> {
    INSTANCE.iter().chain(extra).copied().collect()
}

pub fn commands() -> Vec<Command> {
    let alpha_choice = [
        value("alpha", None, "exponent alpha (exact: 3/2, 1.6)"),
        value("alpha-range", None, "lo,hi,count: seeded uniform draws of alpha"),
    ];
    let equation = [
        value("a1", None, "numerator of a"),
        value("a2", None, "denominator of a"),
        value("b2", Some("0"), "a2*b, an integer"),
    ];
    vec![
        Command {
            name: "solve",
            about: "All n in a range solving the perturbed system at one theta",
            params: with_instance(&[
                value("theta", None, "exact theta in J"),
                value("n-min", Some("1"), "first n"),
                value("n-max", None, "last n"),
                value("max-solutions", None, "stop after this many solutions"),
                flag("primes-only", "test prime n only"),
            ]),
        },
        Command {
            name: "survey",
            about: "Share of seeded theta samples with at least min-hits solutions",
            params: with_instance(&[
                value("samples", Some("100"), "number of theta samples"),
                value("n-max", None, "last n"),
                value("min-hits", Some("1"), "solutions needed per sample"),
                flag("stratified", "one draw per equal-width stratum of J"),
                flag("primes-only", "test prime n only"),
            ]),
        },
        Command {
            name: "hypotheses",
            about: "Classifies the growth and regularity hypotheses of an instance",
            params: with_instance(&[value("n-trunc", Some("1000"), "truncation point for numerical checks")]),
        },
        Command {
            name: "lattice-count",
            about: "Exact count of (q, r, s) with |qr - ps| <= L",
            params: vec![
                value("p", None, "odd prime"),
                value("Q", None, "band start, Q > p"),
                value("L", None, "real L >= 1"),
                value("J", None, "open interval lo,hi"),
                value("qset", Some("band"), "band | primes | empty | q1,q2,..."),
                value("phi", None, "perturbation; switches to the perturbed count"),
                flag("oracle", "also run the brute-force oracle"),
                value("work-cap", Some("200000000"), "oracle work limit"),
            ],
        },
        Command {
            name: "discrepancy",
            about: "Counts of {l alpha} in J against the Erdos-Turan bound",
            params: vec![
                value("alpha", None, "real alpha (exact or expression: sqrt(2))"),
                value("L", None, "number of terms"),
                value("J", None, "open interval lo,hi (reduced mod 1)"),
                value("H", None, "truncation H"),
                flag("h-paper", "use H = floor(1/length(J))"),
                flag("verify", "report every admissible h <= H and fail on a violation"),
            ],
        },
        Command {
            name: "weyl",
            about: "Equidistribution diagnostics of the shifted power sequence",
            params: vec![
                value("family", Some("c1"), "sequence family (c1)"),
                value("a", None, "base a in (0,1)"),
                value("gamma", Some("1"), "nonzero gamma"),
                value("phi", Some("zero"), "perturbation"),
                value("n", None, "scale n"),
                value("J", None, "open interval with closure inside (a, sqrt(a))"),
                value("b-range", Some("3"), "largest frequency b"),
                value("intervals", None, "lo,hi;lo,hi;... subintervals of [0,1)"),
                value("vdc-lag", None, "analyse the lag-h differences instead"),
            ],
        },
        Command {
            name: "ps-scan",
            about: "Solutions of a2*y = a1*x + b2 in PS(alpha)",
            params: equation
                .iter()
                .chain(&alpha_choice)
                .copied()
                .chain([
                    value("n-max", None, "largest n with x = floor(n^alpha)"),
                    value("cap", Some("100"), "pairs listed per alpha"),
                ])
                .collect(),
        },
        Command {
            name: "ps-quotients",
            about: "Bounded-height quotients m/n of PS(alpha) values",
            params: alpha_choice
                .iter()
                .copied()
                .chain([
                    value("n-floor", Some("1"), "smallest PS value used"),
                    value("n-max", None, "largest index k"),
                    value("height-bound", Some("3"), "largest numerator and denominator"),
                ])
                .collect(),
        },
        Command {
            name: "ps-check",
            about: "Audit of the reduced membership test against the direct one",
            params: equation
                .iter()
                .chain(&alpha_choice)
                .copied()
                .chain([value("n-max", None, "largest n")])
                .collect(),
        },
    ]
}
