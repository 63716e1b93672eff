# Regenerates the frozen expected values used by tests/metric_parity.rs.
# Requires sacrebleu==2.0.0.
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a
import sacrebleu

assert sacrebleu.__version__ == "2.0.0"
bleu = BLEU(tokenize="13a", smooth_method="exp")
chrf = CHRF(char_order=6, word_order=0, beta=2, eps_smoothing=False)
tok = Tokenizer13a()

with open("expected_scores.tsv", "w") as out:
    for name in ["cs", "uk", "mixed"]:
        hyps = open(f"desk_{name}.hyp").read().rstrip("\n").split("\n")
        refs = open(f"desk_{name}.ref").read().rstrip("\n").split("\n")
        b = bleu.corpus_score(hyps, [refs])
        c = chrf.corpus_score(hyps, [refs])
        out.write(f"{name}\tcorpus\tbleu\t{b.score!r}\n")
        out.write(f"{name}\tcorpus\tchrf\t{c.score!r}\n")
        for i, (h, r) in enumerate(zip(hyps, refs)):
            out.write(f"{name}\t{i}\tchrf\t{chrf.sentence_score(h, [r]).score!r}\n")
            out.write(f"{name}\t{i}\tsentbleu\t{sacrebleu.sentence_bleu(h, [r]).score!r}\n")
        with open(f"desk_{name}.tok", "w") as t:
            for h in hyps + refs:
                t.write(tok(h.rstrip()) + "\n")
    print(bleu.get_signature(), chrf.get_signature())
