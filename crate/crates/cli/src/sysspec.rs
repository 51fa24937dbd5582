//! The declarative system-spec format.
//!
//! Key-value pairs with an optional nested block:
//!
//! ```text
//! kind=odometer base=2
//! kind=rotation alpha=(-1/2 + 1/2*sqrt(5))
//! kind=permutation n=4 perm=(0 1)(2 3) weights=1/4,1/4,1/4,1/4
//! kind=power k=2 of { kind=odometer base=2 }
//! kind=product n=2 perm=identity weights=1/2,1/2 of { kind=odometer base=2 }
//! ```
//!
//! `perm` defaults to `identity`, `weights` to the uniform 1/n; `#` starts
//! a comment. Serialization round-trips through `to_spec_text`.

use ergolab_core::{FinitePermutation, Scalar, System};

use crate::lex::{parse_scalar, tokenize, Cursor, PResult, ParseError, Tok};

pub fn parse_system_spec(text: &str) -> PResult<System> {
    let mut cur = Cursor::new(tokenize(text)?);
    let system = parse_block(&mut cur)?;
    cur.expect_end()?;
    Ok(system)
}

struct Builder {
    kind: Option<String>,
    base: Option<u64>,
    alpha: Option<Scalar>,
    k: Option<u64>,
    n: Option<u64>,
    perm: Option<Perm>,
    weights: Option<Vec<Scalar>>,
}

enum Perm {
    Identity,
    Cycles(Vec<Vec<usize>>),
}

fn parse_block(cur: &mut Cursor) -> PResult<System> {
    let start = cur.pos();
    let mut b = Builder {
        kind: None,
        base: None,
        alpha: None,
        k: None,
        n: None,
        perm: None,
        weights: None,
    };
    let mut inner: Option<System> = None;
    loop {
        match cur.peek() {
            Some(Tok::Ident(word)) if word == "of" => {
                cur.next();
                cur.expect_punct('{')?;
                inner = Some(parse_block(cur)?);
                cur.expect_punct('}')?;
                break;
            }
            Some(Tok::Ident(_)) => parse_pair(cur, &mut b)?,
            _ => break,
        }
    }
    build(b, inner, start)
}

fn parse_pair(cur: &mut Cursor, b: &mut Builder) -> PResult<()> {
    let pos = cur.pos();
    let Some(Tok::Ident(key)) = cur.next() else {
        unreachable!("caller peeked an ident");
    };
    cur.expect_punct('=')?;
    match key.as_str() {
        "kind" => {
            let pos = cur.pos();
            match cur.next() {
                Some(Tok::Ident(v)) => b.kind = Some(v),
                other => {
                    return Err(ParseError {
                        pos,
                        message: format!(
                            "expected a system kind, found {}",
                            other.map(|t| t.to_string()).unwrap_or("end of input".into())
                        ),
                    })
                }
            }
        }
        "base" => b.base = Some(cur.expect_number()?),
        "k" => b.k = Some(cur.expect_number()?),
        "n" => b.n = Some(cur.expect_number()?),
        "alpha" => b.alpha = Some(parse_scalar(cur)?),
        "perm" => b.perm = Some(parse_perm(cur)?),
        "weights" => {
            let mut ws = vec![parse_scalar(cur)?];
            while cur.eat_punct(',') {
                ws.push(parse_scalar(cur)?);
            }
            b.weights = Some(ws);
        }
        other => {
            return Err(ParseError {
                pos,
                message: format!("unknown key '{other}'"),
            })
        }
    }
    Ok(())
}

fn parse_perm(cur: &mut Cursor) -> PResult<Perm> {
    if cur.eat_ident("identity") {
        return Ok(Perm::Identity);
    }
    let mut cycles = Vec::new();
    let pos = cur.pos();
    while cur.eat_punct('(') {
        let mut cycle = Vec::new();
        while !cur.eat_punct(')') {
            cycle.push(cur.expect_number()? as usize);
        }
        cycles.push(cycle);
    }
    if cycles.is_empty() {
        return Err(ParseError {
            pos,
            message: "expected 'identity' or cycles like (0 1)(2 3)".into(),
        });
    }
    Ok(Perm::Cycles(cycles))
}

fn build(b: Builder, inner: Option<System>, pos: crate::lex::Pos) -> PResult<System> {
    let fail = |message: String| ParseError { pos, message };
    let kind = b
        .kind
        .clone()
        .ok_or_else(|| fail("missing kind=".into()))?;
    let semantic = |e: ergolab_core::Error| fail(e.to_string());

    let finite_part = |b: &Builder| -> PResult<FinitePermutation> {
        let n = match (b.n, &b.weights) {
            (Some(n), _) => n as usize,
            (None, Some(ws)) => ws.len(),
            (None, None) => return Err(fail("permutation needs n= or weights=".into())),
        };
        if n == 0 {
            return Err(fail("n must be at least 1".into()));
        }
        let weights = match &b.weights {
            Some(ws) => {
                if ws.len() != n {
                    return Err(fail(format!("{} weights for n={n}", ws.len())));
                }
                ws.clone()
            }
            None => vec![Scalar::ratio(1u64, n as u64).expect("n > 0"); n],
        };
        match &b.perm {
            None | Some(Perm::Identity) => {
                FinitePermutation::new(weights, (0..n).collect()).map_err(semantic)
            }
            Some(Perm::Cycles(cycles)) => {
                FinitePermutation::from_cycles(weights, cycles).map_err(semantic)
            }
        }
    };

    match kind.as_str() {
        "odometer" => {
            let base = b.base.ok_or_else(|| fail("odometer needs base=".into()))?;
            let base = u32::try_from(base).map_err(|_| fail("base out of range".into()))?;
            System::odometer(base).map_err(semantic)
        }
        "rotation" => {
            let alpha = b.alpha.ok_or_else(|| fail("rotation needs alpha=".into()))?;
            System::rotation(alpha).map_err(semantic)
        }
        "permutation" => Ok(System::permutation(finite_part(&b)?)),
        "product" => {
            let fiber = inner.ok_or_else(|| fail("product needs of { fiber }".into()))?;
            Ok(System::product(finite_part(&b)?, fiber))
        }
        "power" => {
            let k = b.k.ok_or_else(|| fail("power needs k=".into()))?;
            let base = inner.ok_or_else(|| fail("power needs of { system }".into()))?;
            base.power(k).map_err(semantic)
        }
        other => Err(fail(format!("unknown kind '{other}'"))),
    }
}

/// Serializes a system back into the spec format; parsing the output yields
/// an identical descriptor.
pub fn to_spec_text(system: &System) -> String {
    match system {
        System::Odometer { base } => format!("kind=odometer base={base}"),
        System::Rotation { angle } => {
            if angle.is_rational() {
                format!("kind=rotation alpha={angle}")
            } else {
                format!("kind=rotation alpha=({angle})")
            }
        }
        System::Permutation(p) => format!("kind=permutation {}", finite_text(p)),
        System::Product { perm, fiber } => {
            format!(
                "kind=product {} of {{ {} }}",
                finite_text(perm),
                to_spec_text(fiber)
            )
        }
        System::Power { base, exponent } => {
            format!("kind=power k={exponent} of {{ {} }}", to_spec_text(base))
        }
    }
}

fn finite_text(p: &FinitePermutation) -> String {
    let cycles: Vec<Vec<usize>> = p.cycles().into_iter().filter(|c| c.len() > 1).collect();
    let perm = if cycles.is_empty() {
        "identity".to_string()
    } else {
        cycles
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|i| i.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect::<Vec<_>>()
            .join("")
    };
    let weights: Vec<String> = p.weights().iter().map(|w| w.to_string()).collect();
    format!("n={} perm={} weights={}", p.n(), perm, weights.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_examples() {
        let odo = parse_system_spec("kind=odometer base=2").unwrap();
        assert_eq!(odo, System::odometer(2).unwrap());

        let golden = parse_system_spec("kind=rotation alpha=(\u{2212}1/2 + 1/2*sqrt(5))").unwrap();
        let want = System::rotation("-1/2+1/2*sqrt(5)".parse().unwrap()).unwrap();
        assert_eq!(golden, want);

        let power = parse_system_spec("kind=power k=2 of { kind=odometer base=2 }").unwrap();
        assert_eq!(power, System::odometer(2).unwrap().power(2).unwrap());
    }

    #[test]
    fn parses_permutations_and_products() {
        let p = parse_system_spec("kind=permutation n=4 perm=(0 1)(2 3)").unwrap();
        let want = System::permutation(
            FinitePermutation::from_cycles(vec![Scalar::rat(1, 4); 4], &[vec![0, 1], vec![2, 3]])
                .unwrap(),
        );
        assert_eq!(p, want);

        let prod = parse_system_spec(
            "kind=product n=2 perm=identity weights=1/2,1/2 of { kind=odometer base=2 }",
        )
        .unwrap();
        assert!(matches!(prod, System::Product { .. }));
    }

    #[test]
    fn semantic_errors_name_the_invariant() {
        let err = parse_system_spec("kind=rotation alpha=3/2").unwrap_err();
        assert!(err.message.contains("[0, 1)"), "{err}");
        let err =
            parse_system_spec("kind=permutation n=2 weights=1/3,1/3").unwrap_err();
        assert!(err.message.contains("sum"), "{err}");
        let err = parse_system_spec("kind=permutation n=2 perm=(0 0)").unwrap_err();
        assert!(err.message.contains("once") || err.message.contains("more than one"), "{err}");
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_system_spec("kind=odometer\nbase=x").unwrap_err();
        assert_eq!(err.pos.line, 2);
    }

    #[test]
    fn round_trips_through_text() {
        let specs = [
            "kind=odometer base=3",
            "kind=rotation alpha=2/5",
            "kind=rotation alpha=(-1/2 + 1/2*sqrt(5))",
            "kind=permutation n=4 perm=(0 1)(2 3) weights=1/4,1/4,1/4,1/4",
            "kind=power k=6 of { kind=odometer base=2 }",
            "kind=product n=2 perm=identity weights=1/2,1/2 of { kind=odometer base=2 }",
            "kind=product n=3 perm=(0 1 2) weights=1/3,1/3,1/3 of { kind=rotation alpha=1/6 }",
        ];
        for text in specs {
            let parsed = parse_system_spec(text).unwrap();
            let rendered = to_spec_text(&parsed);
            let reparsed = parse_system_spec(&rendered).unwrap();
            assert_eq!(parsed, reparsed, "{text} -> {rendered}");
        }
    }
}
