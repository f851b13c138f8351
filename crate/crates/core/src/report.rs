//! Deterministic number formatting for file outputs.
//!
//! CSV cells are rendered with exactly 12 significant digits, rounded
//! half-to-even against the exact decimal expansion of the binary value, so
//! identical runs produce byte-identical files on every platform.

/// Format with 12 significant digits, round-half-even, in the canonical form
/// `d.dddddddddddE` with a lowercase `e` exponent (e.g. `8.61057171581e-1`).
pub fn fmt_g12(x: f64) -> String {
    const SIG: usize = 12;
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    let neg = x < 0.0;
    let ax = x.abs();

    // The exact decimal expansion of an f64 has at most 767 significant
    // digits; precision 766 therefore captures every nonzero digit.
    let exact = format!("{:.766e}", ax);
    let (mantissa, exp_str) = exact.split_once('e').expect("exponent");
    let mut exp: i32 = exp_str.parse().expect("exponent digits");
    let mut digits: Vec<u8> = mantissa
        .bytes()
        .filter(|&b| b != b'.')
        .map(|b| b - b'0')
        .collect();

    // Round at SIG digits, half to even, using the exact tail.
    let tail_gt_half = digits[SIG] > 5 || (digits[SIG] == 5 && digits[SIG + 1..].iter().any(|&d| d != 0));
    let tail_is_half = digits[SIG] == 5 && digits[SIG + 1..].iter().all(|&d| d == 0);
    let round_up = tail_gt_half || (tail_is_half && digits[SIG - 1] % 2 == 1);
    digits.truncate(SIG);
    if round_up {
        let mut i = SIG;
        loop {
            if i == 0 {
                digits.insert(0, 1);
                digits.truncate(SIG);
                exp += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }

    let mut out = String::with_capacity(SIG + 8);
    if neg {
        out.push('-');
    }
    out.push((b'0' + digits[0]) as char);
    out.push('.');
    for &d in &digits[1..] {
        out.push((b'0' + d) as char);
    }
    out.push('e');
    out.push_str(&exp.to_string());
    out
}
