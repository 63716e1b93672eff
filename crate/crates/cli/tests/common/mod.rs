//! Synthetic inputs for every subcommand and a runner for the binary.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_mtkit");

const CS: &[&str] = &[
    "dům", "strom", "řeka", "město", "kniha", "okno", "cesta", "voda", "hora", "most", "škola", "zahrada", "vlak",
    "pole", "les", "jezero", "lampa", "stůl", "dveře", "obraz", "žena", "muž", "dítě", "čas",
];
const UK: &[&str] = &[
    "будинок",
    "дерево",
    "річка",
    "місто",
    "книга",
    "вікно",
    "дорога",
    "вода",
    "гора",
    "міст",
    "школа",
    "сад",
    "потяг",
    "поле",
    "ліс",
    "озеро",
    "лампа",
    "стіл",
    "двері",
    "картина",
];

fn sentence(rng: &mut ChaCha8Rng, vocab: &[&str], len: std::ops::Range<usize>) -> Vec<String> {
    let n = rng.gen_range(len);
    (0..n).map(|_| vocab.choose(rng).unwrap().to_string()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Writes every input file into `dir`.
pub fn write_fixtures(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // references, two systems and n-best lists
    let refs: Vec<Vec<String>> = (0..20).map(|_| sentence(&mut rng, CS, 5..12)).collect();
    let mut refs_txt = String::new();
    let mut sys_b = String::new();
    let mut ens = String::new();
    let mut doc = String::new();
    for (seg, r) in refs.iter().enumerate() {
        writeln!(refs_txt, "{}", r.join(" ")).unwrap();
        writeln!(sys_b, "{}", sentence(&mut rng, CS, 4..10).join(" ")).unwrap();
        for (out, n) in [(&mut ens, 30), (&mut doc, 10)] {
            for _ in 0..n {
                let mut w = r.clone();
                let edits = rng.gen_range(0..4);
                for _ in 0..edits {
                    let i = rng.gen_range(0..w.len());
                    w[i] = CS.choose(&mut rng).unwrap().to_string();
                }
                let lm: f64 = -(edits as f64) + rng.gen_range(-1.0..1.0);
                let tm: f64 = rng.gen_range(-3.0..0.0);
                writeln!(
                    out,
                    "{seg} ||| {} ||| lm= {lm:.4} tm= {tm:.4} len= {} ||| {:.4}",
                    w.join(" "),
                    w.len(),
                    lm + tm
                )
                .unwrap();
            }
        }
    }
    write(dir, "ref.txt", &refs_txt);
    write(dir, "sys_b.txt", &sys_b);
    write(dir, "ens.nbest", &ens);
    write(dir, "doc.nbest", &doc);
    write(dir, "weights.tsv", "lm\t1\ntm\t0.5\nlen\t0.05\n");
    let ext: String = (0..20).map(|_| format!("{:.3}\n", rng.gen_range(0.0..1.0))).collect();
    write(dir, "ext_a.txt", &ext);

    // factors
    let tokens = "Hlavní inspektor organizace RSPCA pro Nový Jižní Wales David O'Shannessy televizi ABC sdělil .\n\
                  Praha je hlavní město České republiky .\n\
                  Firma Škoda sídlí v Mladé Boleslavi .\n";
    write(dir, "tokens.txt", tokens);
    write(
        dir,
        "standoff.txt",
        "0 3 4 ORG\n0 5 8 LOC\n0 8 10 PER\n0 11 12 PRO\n1 0 1 LOC\n1 4 6 LOC\n2 1 2 ORG\n2 4 6 LOC\n",
    );
    write(
        dir,
        "gazetteer.tsv",
        "Praha\tLOC\nNový Jižní Wales\tLOC\nŠkoda\tORG\nDavid O'Shannessy\tPER\nABC\tPRO\n",
    );
    let factored = "Praha|p2 je|p0 hlavní|p0 město|p0 České|p2 republiky|p2 .|p0\n\
                    Firma|p0 Škoda|p3 sídlí|p0 v|p0 Mladé|p2 Boleslavi|p2 .|p0\n";
    write(dir, "factored.txt", factored);
    let mut subwords = String::new();
    for line in factored.lines() {
        let mut pieces = Vec::new();
        for item in line.split(' ') {
            let surface = item.rsplit_once('|').unwrap().0;
            let chars: Vec<char> = surface.chars().collect();
            for (k, chunk) in chars.chunks(3).enumerate() {
                let body: String = chunk.iter().collect();
                pieces.push(if k == 0 { format!("▁{body}") } else { body });
            }
        }
        writeln!(subwords, "{}", pieces.join(" ")).unwrap();
    }
    write(dir, "subwords.txt", &subwords);

    // parallel corpus with documents, some noise for the filter
    let mut corpus = String::new();
    let mut docs = String::new();
    let mut start = 0;
    for _ in 0..8 {
        let len = rng.gen_range(3..12);
        for _ in 0..len {
            let s = sentence(&mut rng, CS, 1..30);
            let t = sentence(&mut rng, UK, 1..30);
            writeln!(corpus, "{}\t{}", s.join(" "), t.join(" ")).unwrap();
        }
        writeln!(docs, "{start} {}", start + len).unwrap();
        start += len;
    }
    corpus.push_str("„Ahoj“ – světe…\t«Привіт» — світ…\n„Ahoj“ – světe…\t«Привіт» — світ…\n");
    writeln!(docs, "{start} {}", start + 2).unwrap();
    write(dir, "corpus.tsv", &corpus);
    write(dir, "docs.txt", &docs);

    // document-level n-best with chunk ranges
    let mut docnb = String::new();
    let chunks = [(0usize, 3usize), (3, 5), (5, 6)];
    let mut chunk_txt = String::new();
    for (c, &(a, b)) in chunks.iter().enumerate() {
        writeln!(chunk_txt, "{a} {b}").unwrap();
        for h in 0..4 {
            let parts: Vec<String> = (a..b).map(|_| sentence(&mut rng, UK, 2..6).join(" ")).collect();
            // every fourth hypothesis loses a separator
            let text = if h == 3 && parts.len() > 1 {
                parts.join(" ")
            } else {
                parts.join(" <SEP> ")
            };
            writeln!(docnb, "{c} ||| {text} ||| lm= -{h}.5 ||| -{h}.5").unwrap();
        }
    }
    write(dir, "docs.nbest", &docnb);
    write(dir, "chunks.txt", &chunk_txt);

    // post-processing
    write(
        dir,
        "pp.src",
        "Díky moc 🙂\nJak se máš?\nSTOP NOW\n- položka\nDobrý den...\n1. krok\nRodina 👨‍👩‍👧 doma\n",
    );
    write(
        dir,
        "pp.hyp",
        "Дякую дуже\nЯк справи\nзупиніться зараз\nпункт\nДобрий день...\nкрок крок\nРодина вдома\n",
    );
    write(
        dir,
        "pp.align",
        "0-0 1-1\n0-0 1-1 2-1\n0-0 1-1\n1-0\n0-0 1-1\n1-0\n0-0 2-1\n",
    );

    // translation memory inputs
    let mut tm_inputs = String::new();
    for line in corpus.lines().take(12) {
        let mut w: Vec<&str> = line.split('\t').next().unwrap().split(' ').collect();
        if w.len() > 2 {
            w.pop();
        }
        writeln!(tm_inputs, "{}", w.join(" ")).unwrap();
    }
    tm_inputs.push_str("zcela neznámá věta\n");
    write(dir, "tm_inputs.txt", &tm_inputs);
}

/// One invocation: its name, arguments with `{in}` and `{out}` placeholders,
/// and the output files it writes under `{out}`.
pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
    pub outputs: Vec<&'static str>,
}

fn case(name: &'static str, args: &str, outputs: &[&'static str]) -> Case {
    Case {
        name,
        args: args.split_whitespace().map(str::to_string).collect(),
        outputs: outputs.to_vec(),
    }
}

/// One case per subcommand. `tm query` and `tm adapt-set` read `{in}/tm.idx`,
/// which [`prepare`] builds.
pub fn cases() -> Vec<Case> {
    vec![
        case("metrics score", "metrics score --metric bleu --hyp {in}/sys_b.txt --ref {in}/ref.txt", &[]),
        case("metrics bootstrap", "metrics bootstrap --metric chrf --sys-a {in}/ref.txt --sys-b {in}/sys_b.txt --ref {in}/ref.txt --trials 300", &[]),
        case("rerank tune", "rerank tune --nbest {in}/ens.nbest --ref {in}/ref.txt --weights {in}/weights.tsv --restarts 3 --out {out}/tuned.tsv", &["tuned.tsv"]),
        case("rerank apply", "rerank apply --nbest {in}/ens.nbest --weights {in}/weights.tsv", &[]),
        case("rerank prune", "rerank prune --nbest {in}/ens.nbest --weights {in}/weights.tsv --k 7", &[]),
        case("rerank grid", "rerank grid --nbest {in}/ens.nbest --ref {in}/ref.txt --grid lm=0,0.5,1 --grid tm=0,0.5,1 --grid len=-0.1,0,0.1 --metric chrf --report {out}/grid.tsv", &["grid.tsv"]),
        case("mbr decode", "mbr decode --nbest {in}/ens.nbest --samples {in}/doc.nbest --utility chrf --dump-utilities {out}/utilities.tsv", &["utilities.tsv"]),
        case("mbr matrix", "mbr matrix --nbest {in}/doc.nbest --utility bleu-sentence", &[]),
        case("pipeline qad", "pipeline qad --ensemble {in}/ens.nbest --doc {in}/doc.nbest --weights {in}/weights.tsv --k 20 --utility chrf --dump-utilities {out}/qad.tsv", &["qad.tsv"]),
        case("factors tag", "factors tag --tokens {in}/tokens.txt --standoff {in}/standoff.txt", &[]),
        case("factors propagate", "factors propagate --factored {in}/factored.txt --subwords {in}/subwords.txt", &[]),
        case("factors count", "factors count --factored {in}/factored.txt", &[]),
        case("docdata build", "docdata build --corpus {in}/corpus.tsv --docs {in}/docs.txt --mode window_50t", &[]),
        case("docdata build --merged", "docdata build --corpus {in}/corpus.tsv --docs {in}/docs.txt --merged --seed 3", &[]),
        case("docdata split", "docdata split --nbest {in}/docs.nbest --chunks {in}/chunks.txt --out {out}/split.nbest", &["split.nbest"]),
        case("filter run", "filter run --corpus {in}/corpus.tsv --max-len 25 --max-ratio 2 --out {out}/filtered.tsv", &["filtered.tsv"]),
        case("postprocess run", "postprocess run --src {in}/pp.src --hyp {in}/pp.hyp --lang uk --align {in}/pp.align", &[]),
        case("postprocess run --trace", "postprocess run --src {in}/pp.src --hyp {in}/pp.hyp --lang uk --rules r3,r5,r7 --trace", &[]),
        case("tm index", "tm index --corpus {in}/corpus.tsv --out {out}/tm.idx", &["tm.idx"]),
        case("tm query", "tm query --index {in}/tm.idx --input {in}/tm_inputs.txt --k 3 --threshold 0.25", &[]),
        case("tm adapt-set", "tm adapt-set --index {in}/tm.idx --input {in}/tm_inputs.txt --k 5 --threshold 0.19 --out {out}/adapt.tsv", &["adapt.tsv"]),
    ]
}

pub fn mtkit(args: &[String]) -> Output {
    Command::new(BIN).args(args).output().expect("failed to run mtkit")
}

pub fn substitute(args: &[String], input: &Path, out: &Path) -> Vec<String> {
    args.iter()
        .map(|a| {
            a.replace("{in}", input.to_str().unwrap())
                .replace("{out}", out.to_str().unwrap())
        })
        .collect()
}

/// Writes fixtures and the translation memory index into `dir`.
pub fn prepare(dir: &Path) {
    write_fixtures(dir);
    let args = substitute(
        &[
            "tm".into(),
            "index".into(),
            "--corpus".into(),
            "{in}/corpus.tsv".into(),
            "--out".into(),
            "{in}/tm.idx".into(),
        ],
        dir,
        dir,
    );
    let out = mtkit(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// Exit code, stdout and output file contents of one run.
pub type RunResult = (Option<i32>, Vec<u8>, Vec<Vec<u8>>);

pub fn run_case(case: &Case, input: &Path, out: &Path, threads: usize, seed: u64) -> RunResult {
    fs::create_dir_all(out).unwrap();
    let mut args = substitute(&case.args, input, out);
    args.extend(["--threads".to_string(), threads.to_string()]);
    if !args.iter().any(|a| a == "--seed") {
        args.extend(["--seed".to_string(), seed.to_string()]);
    }
    let o = mtkit(&args);
    let files = case
        .outputs
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap_or_default())
        .collect();
    if !o.status.success() {
        eprintln!("{}: {}", case.name, String::from_utf8_lossy(&o.stderr));
    }
    (o.status.code(), o.stdout, files)
}
