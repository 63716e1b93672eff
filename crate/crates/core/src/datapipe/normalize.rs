//! Punctuation normalization.
//!
//! Rules, applied in order:
//! 1. remove control and invisible format characters (zero-width spaces,
//!    bidi marks, soft hyphens, BOM); tabs and line breaks become spaces;
//! 2. typographic double quotes and guillemets become `"`; single quotes,
//!    primes and apostrophe variants become `'`;
//! 3. en/em dashes, figure dash, horizontal bar and minus sign become `-`;
//! 4. the ellipsis character becomes `...`;
//! 5. runs of Unicode whitespace (including no-break spaces) collapse to one
//!    space, and the ends are trimmed.
//!
//! Every rule's output is a fixed point of all rules, so the whole is idempotent.

fn is_nonprinting(c: char) -> bool {
    matches!(c,
        '\u{00AD}'
        | '\u{200B}' | '\u{200C}' | '\u{200E}' | '\u{200F}'
        | '\u{202A}'..='\u{202E}'
        | '\u{2060}'..='\u{2064}'
        | '\u{2066}'..='\u{2069}'
        | '\u{FEFF}'
    ) || (c.is_control() && !c.is_whitespace())
}

/// Rule 1 only.
pub fn strip_nonprinting(text: &str) -> String {
    text.chars()
        .filter(|&c| !is_nonprinting(c))
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect()
}

pub fn normalize_punct(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if is_nonprinting(c) {
            continue;
        }
        match c {
            '„' | '“' | '”' | '‟' | '«' | '»' | '″' | '＂' => out.push('"'),
            '‚' | '‘' | '’' | '‛' | '′' | '‹' | '›' | '＇' => out.push('\''),
            '–' | '—' | '‒' | '―' | '−' => out.push('-'),
            '…' => out.push_str("..."),
            _ => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixtures() {
        for (input, expected) in [
            ("Už je to tak.", "Už je to tak."),
            ("a\u{200B}b", "ab"),
            ("„Ahoj,“ řekl.", "\"Ahoj,\" řekl."),
            ("«Привіт» — сказав", "\"Привіт\" - сказав"),
            ("it’s", "it's"),
            ("a…", "a..."),
            ("  mezery\t\tvšude\u{00A0}tady \n", "mezery všude tady"),
            ("x\u{FEFF}y\u{00AD}z", "xyz"),
            ("1–2", "1-2"),
            ("", ""),
        ] {
            assert_eq!(normalize_punct(input), expected, "{input:?}");
        }
        assert_eq!(strip_nonprinting("a\u{200B}b\tc"), "ab c");
    }

    #[test]
    fn keeps_emoji_joiners() {
        let family = "👨\u{200D}👩\u{200D}👧";
        assert_eq!(normalize_punct(family), family);
    }

    proptest! {
        #[test]
        fn idempotent(s in "(\\PC|[\u{200B}\u{00A0}\t\n„“”«»–—…’\u{FEFF}])*") {
            let once = normalize_punct(&s);
            prop_assert_eq!(normalize_punct(&once), once.clone());
            let stripped = strip_nonprinting(&s);
            prop_assert_eq!(strip_nonprinting(&stripped), stripped);
        }
    }
}
