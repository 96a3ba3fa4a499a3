//! Transcript cleanup: digit runs become Chinese numerals, punctuation and
//! symbols are dropped.

use unicode_general_category::{get_general_category, GeneralCategory as Gc};

use crate::error::{Error, Result};

pub const MAX_NUMERAL: u64 = 99_999_999;

const DIGITS: [char; 10] = ['零', '一', '二', '三', '四', '五', '六', '七', '八', '九'];
const UNITS: [char; 4] = ['\0', '十', '百', '千'];

/// Rewrites `text` so it can be aligned character by character: every
/// maximal ASCII digit run becomes its Chinese reading and every
/// punctuation, symbol or whitespace character is removed.
pub fn normalize_transcript(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut run = String::new();
    for c in text.chars() {
        if c.is_ascii_digit() {
            run.push(c);
            continue;
        }
        flush_digits(&mut run, &mut out)?;
        if !is_dropped(c) {
            out.push(c);
        }
    }
    flush_digits(&mut run, &mut out)?;
    Ok(out)
}

fn flush_digits(run: &mut String, out: &mut String) -> Result<()> {
    if run.is_empty() {
        return Ok(());
    }
    let value = run
        .parse::<u64>()
        .ok()
        .filter(|&v| v <= MAX_NUMERAL)
        .ok_or_else(|| Error::NumeralOverflow(run.clone()))?;
    out.push_str(&chinese_numeral(value)?);
    run.clear();
    Ok(())
}

fn is_dropped(c: char) -> bool {
    if c.is_whitespace() {
        return true;
    }
    matches!(
        get_general_category(c),
        Gc::ConnectorPunctuation
            | Gc::DashPunctuation
            | Gc::OpenPunctuation
            | Gc::ClosePunctuation
            | Gc::InitialPunctuation
            | Gc::FinalPunctuation
            | Gc::OtherPunctuation
            | Gc::MathSymbol
            | Gc::CurrencySymbol
            | Gc::ModifierSymbol
            | Gc::OtherSymbol
    )
}

/// Colloquial reading of `value`, e.g. 1200 -> 一千两百, 15 -> 十五.
pub fn chinese_numeral(value: u64) -> Result<String> {
    if value > MAX_NUMERAL {
        return Err(Error::NumeralOverflow(value.to_string()));
    }
    if value == 0 {
        return Ok(DIGITS[0].to_string());
    }
    let high = value / 10_000;
    let low = value % 10_000;
    let mut out = String::new();
    if high > 0 {
        if high == 2 {
            out.push('两');
        } else {
            read_section(high, true, &mut out);
        }
        out.push('万');
        if low > 0 {
            if low < 1000 {
                out.push(DIGITS[0]);
            }
            read_section(low, false, &mut out);
        }
    } else {
        read_section(low, true, &mut out);
    }
    Ok(out)
}

/// Reads 1..=9999. `leading` allows the bare 十 for 10..=19.
fn read_section(value: u64, leading: bool, out: &mut String) {
    debug_assert!((1..10_000).contains(&value));
    let digits = [value / 1000, value / 100 % 10, value / 10 % 10, value % 10];
    let mut emitted = false;
    let mut pending_zero = false;
    for (i, &d) in digits.iter().enumerate() {
        let place = 3 - i;
        if d == 0 {
            pending_zero |= emitted;
            continue;
        }
        if pending_zero {
            out.push(DIGITS[0]);
            pending_zero = false;
        }
        let bare_ten = place == 1 && d == 1 && !emitted && leading;
        if !bare_ten {
            let two_colloquial = d == 2 && place >= 2;
            out.push(if two_colloquial { '两' } else { DIGITS[d as usize] });
        }
        if place > 0 {
            out.push(UNITS[place]);
        }
        emitted = true;
    }
}
