//! Porter stemmer, original 1980 rules (steps 1a through 5b).
//!
//! Works on lowercase ASCII-alphabetic words; tokens containing digits or
//! shorter than three letters pass through unchanged, matching the usual
//! convention for the original algorithm.

/// Stems a single lowercase token.
pub fn stem(token: &str) -> String {
    if token.len() < 3 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    let mut w = Word {
        buf: token.as_bytes().to_vec(),
    };
    w.step_1a();
    w.step_1b();
    w.step_1c();
    w.step_2();
    w.step_3();
    w.step_4();
    w.step_5a();
    w.step_5b();
    String::from_utf8(w.buf).expect("ascii buffer")
}

struct Word {
    buf: Vec<u8>,
}

impl Word {
    fn len(&self) -> usize {
        self.buf.len()
    }

    /// A letter is a consonant unless it is a vowel, or a `y` preceded by a
    /// consonant.
    fn is_consonant(&self, i: usize) -> bool {
        match self.buf[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// The measure m of buf[..end]: the number of vowel-consonant sequences.
    fn measure(&self, end: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        // skip initial consonants
        while i < end && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < end && !self.is_consonant(i) {
                i += 1;
            }
            if i >= end {
                return m;
            }
            m += 1;
            while i < end && self.is_consonant(i) {
                i += 1;
            }
            if i >= end {
                return m;
            }
        }
    }

    fn has_vowel(&self, end: usize) -> bool {
        (0..end).any(|i| !self.is_consonant(i))
    }

    fn ends_double_consonant(&self) -> bool {
        let n = self.len();
        n >= 2 && self.buf[n - 1] == self.buf[n - 2] && self.is_consonant(n - 1)
    }

    /// *o condition: stem ends consonant-vowel-consonant where the final
    /// consonant is not w, x or y.
    fn ends_cvc(&self, end: usize) -> bool {
        if end < 3 {
            return false;
        }
        self.is_consonant(end - 3)
            && !self.is_consonant(end - 2)
            && self.is_consonant(end - 1)
            && !matches!(self.buf[end - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &[u8]) -> bool {
        self.buf.ends_with(suffix)
    }

    fn stem_len(&self, suffix: &[u8]) -> usize {
        self.len() - suffix.len()
    }

    fn replace(&mut self, suffix: &[u8], with: &[u8]) {
        let at = self.stem_len(suffix);
        self.buf.truncate(at);
        self.buf.extend_from_slice(with);
    }

    /// Applies the first matching rule whose measure condition holds at the
    /// stem. Rules must be listed longest suffix first.
    fn apply_rules(&mut self, min_m: usize, rules: &[(&[u8], &[u8])]) {
        for &(suffix, with) in rules {
            if self.ends_with(suffix) {
                if self.measure(self.stem_len(suffix)) > min_m {
                    self.replace(suffix, with);
                }
                return;
            }
        }
    }

    fn step_1a(&mut self) {
        if self.ends_with(b"sses") {
            self.replace(b"sses", b"ss");
        } else if self.ends_with(b"ies") {
            self.replace(b"ies", b"i");
        } else if self.ends_with(b"ss") {
            // unchanged
        } else if self.ends_with(b"s") {
            self.replace(b"s", b"");
        }
    }

    fn step_1b(&mut self) {
        if self.ends_with(b"eed") {
            if self.measure(self.stem_len(b"eed")) > 0 {
                self.replace(b"eed", b"ee");
            }
            return;
        }
        let removed = if self.ends_with(b"ed") && self.has_vowel(self.stem_len(b"ed")) {
            self.replace(b"ed", b"");
            true
        } else if self.ends_with(b"ing") && self.has_vowel(self.stem_len(b"ing")) {
            self.replace(b"ing", b"");
            true
        } else {
            false
        };
        if !removed {
            return;
        }
        if self.ends_with(b"at") {
            self.replace(b"at", b"ate");
        } else if self.ends_with(b"bl") {
            self.replace(b"bl", b"ble");
        } else if self.ends_with(b"iz") {
            self.replace(b"iz", b"ize");
        } else if self.ends_double_consonant()
            && !matches!(self.buf[self.len() - 1], b'l' | b's' | b'z')
        {
            self.buf.truncate(self.len() - 1);
        } else if self.measure(self.len()) == 1 && self.ends_cvc(self.len()) {
            self.buf.push(b'e');
        }
    }

    fn step_1c(&mut self) {
        if self.ends_with(b"y") && self.has_vowel(self.stem_len(b"y")) {
            self.replace(b"y", b"i");
        }
    }

    fn step_2(&mut self) {
        self.apply_rules(
            0,
            &[
                (b"ational", b"ate"),
                (b"ization", b"ize"),
                (b"iveness", b"ive"),
                (b"fulness", b"ful"),
                (b"ousness", b"ous"),
                (b"tional", b"tion"),
                (b"biliti", b"ble"),
                (b"ation", b"ate"),
                (b"alism", b"al"),
                (b"aliti", b"al"),
                (b"iviti", b"ive"),
                (b"ously", b"ous"),
                (b"entli", b"ent"),
                (b"ousli", b"ous"),
                (b"enci", b"ence"),
                (b"anci", b"ance"),
                (b"izer", b"ize"),
                (b"abli", b"able"),
                (b"alli", b"al"),
                (b"ator", b"ate"),
                (b"eli", b"e"),
            ],
        );
    }

    fn step_3(&mut self) {
        self.apply_rules(
            0,
            &[
                (b"icate", b"ic"),
                (b"ative", b""),
                (b"alize", b"al"),
                (b"iciti", b"ic"),
                (b"ical", b"ic"),
                (b"ness", b""),
                (b"ful", b""),
            ],
        );
    }

    fn step_4(&mut self) {
        // ION needs the extra *S-or-*T condition on the stem.
        if self.ends_with(b"ion") {
            let at = self.stem_len(b"ion");
            if self.measure(at) > 1 && at > 0 && matches!(self.buf[at - 1], b's' | b't') {
                self.replace(b"ion", b"");
            }
            return;
        }
        self.apply_rules(
            1,
            &[
                (b"ement", b""),
                (b"ance", b""),
                (b"ence", b""),
                (b"able", b""),
                (b"ible", b""),
                (b"ment", b""),
                (b"ant", b""),
                (b"ent", b""),
                (b"ism", b""),
                (b"ate", b""),
                (b"iti", b""),
                (b"ous", b""),
                (b"ive", b""),
                (b"ize", b""),
                (b"al", b""),
                (b"er", b""),
                (b"ic", b""),
                (b"ou", b""),
            ],
        );
    }

    fn step_5a(&mut self) {
        if !self.ends_with(b"e") {
            return;
        }
        let at = self.stem_len(b"e");
        let m = self.measure(at);
        if m > 1 || (m == 1 && !self.ends_cvc(at)) {
            self.replace(b"e", b"");
        }
    }

    fn step_5b(&mut self) {
        if self.measure(self.len()) > 1
            && self.ends_double_consonant()
            && self.buf[self.len() - 1] == b'l'
        {
            self.buf.truncate(self.len() - 1);
        }
    }
}
