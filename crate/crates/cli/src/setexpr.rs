//! Set-expression mini-language, typed against a space.
//!
//! Atoms: `cyl("digits")` (digit 0 first), `interval(lo, hi)`,
//! `atoms{i,j,...}`, `fiber(i, expr)`, `empty`, `full`. Operators, tightest
//! first: `~` (complement), `&`, `^`, `|`, `\`. Parentheses group.
//!
//! On a product space, `atoms{...}` lifts to full fibers and `fiber(i, e)`
//! places a fiber-space expression over atom i.

use ergolab_core::{CylinderSet, IntervalSet, ProductSet, SetClass, Space};

use crate::lex::{parse_scalar, tokenize, Cursor, PResult, ParseError, Tok};

pub fn parse_set_expr(text: &str, space: &Space) -> PResult<SetClass> {
    let mut cur = Cursor::new(tokenize(text)?);
    let set = parse_diff(&mut cur, space)?;
    cur.expect_end()?;
    Ok(set)
}

fn semantic(cur: &Cursor, e: ergolab_core::Error) -> ParseError {
    cur.error(e.to_string())
}

fn parse_diff(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    let mut value = parse_or(cur, space)?;
    while cur.eat_punct('\\') {
        let rhs = parse_or(cur, space)?;
        value = value.difference(&rhs).map_err(|e| semantic(cur, e))?;
    }
    Ok(value)
}

fn parse_or(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    let mut value = parse_xor(cur, space)?;
    while cur.eat_punct('|') {
        let rhs = parse_xor(cur, space)?;
        value = value.union(&rhs).map_err(|e| semantic(cur, e))?;
    }
    Ok(value)
}

fn parse_xor(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    let mut value = parse_and(cur, space)?;
    while cur.eat_punct('^') {
        let rhs = parse_and(cur, space)?;
        value = value.symdiff(&rhs).map_err(|e| semantic(cur, e))?;
    }
    Ok(value)
}

fn parse_and(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    let mut value = parse_unary(cur, space)?;
    while cur.eat_punct('&') {
        let rhs = parse_unary(cur, space)?;
        value = value.intersect(&rhs).map_err(|e| semantic(cur, e))?;
    }
    Ok(value)
}

fn parse_unary(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    if cur.eat_punct('~') {
        let inner = parse_unary(cur, space)?;
        return inner.complement().map_err(|e| semantic(cur, e));
    }
    parse_primary(cur, space)
}

fn parse_primary(cur: &mut Cursor, space: &Space) -> PResult<SetClass> {
    let pos = cur.pos();
    if cur.eat_punct('(') {
        let inner = parse_diff(cur, space)?;
        cur.expect_punct(')')?;
        return Ok(inner);
    }
    let word = match cur.next() {
        Some(Tok::Ident(w)) => w,
        Some(t) => {
            return Err(ParseError {
                pos,
                message: format!("expected a set expression, found {t}"),
            })
        }
        None => {
            return Err(ParseError {
                pos,
                message: "expected a set expression, found end of input".into(),
            })
        }
    };
    match word.as_str() {
        "empty" => Ok(SetClass::empty(space)),
        "full" => Ok(SetClass::full(space)),
        "cyl" => parse_cyl(cur, space, pos),
        "interval" => parse_interval(cur, space, pos),
        "atoms" => parse_atoms(cur, space, pos),
        "fiber" => parse_fiber(cur, space, pos),
        other => Err(ParseError {
            pos,
            message: format!("unknown set atom '{other}'"),
        }),
    }
}

fn parse_cyl(cur: &mut Cursor, space: &Space, pos: crate::lex::Pos) -> PResult<SetClass> {
    let &Space::Cylinder { base } = space else {
        return Err(ParseError {
            pos,
            message: format!("cyl(...) needs a cylinder space, this space is {space}"),
        });
    };
    cur.expect_punct('(')?;
    let word_pos = cur.pos();
    let word = match cur.next() {
        Some(Tok::Str(s)) => s,
        Some(Tok::Number(s)) => s, // unquoted digit words are accepted
        other => {
            return Err(ParseError {
                pos: word_pos,
                message: format!(
                    "expected a digit word, found {}",
                    other.map(|t| t.to_string()).unwrap_or("end of input".into())
                ),
            })
        }
    };
    cur.expect_punct(')')?;
    let digits: Vec<u32> = word
        .chars()
        .map(|c| {
            c.to_digit(10).ok_or_else(|| ParseError {
                pos: word_pos,
                message: format!("'{c}' is not a digit"),
            })
        })
        .collect::<PResult<_>>()?;
    CylinderSet::from_word(base, &digits)
        .map(SetClass::from)
        .map_err(|e| ParseError {
            pos: word_pos,
            message: e.to_string(),
        })
}

fn parse_interval(cur: &mut Cursor, space: &Space, pos: crate::lex::Pos) -> PResult<SetClass> {
    let Space::Circle { field } = space else {
        return Err(ParseError {
            pos,
            message: format!("interval(...) needs a circle space, this space is {space}"),
        });
    };
    cur.expect_punct('(')?;
    let lo_pos = cur.pos();
    let lo = parse_scalar(cur)?;
    cur.expect_punct(',')?;
    let hi = parse_scalar(cur)?;
    cur.expect_punct(')')?;
    for endpoint in [&lo, &hi] {
        if !field.admits(endpoint.field()) {
            return Err(ParseError {
                pos: lo_pos,
                message: format!("endpoint {endpoint} leaves the space field {field}"),
            });
        }
    }
    if lo >= hi {
        return Err(ParseError {
            pos: lo_pos,
            message: format!("interval needs lo < hi, got [{lo}, {hi})"),
        });
    }
    IntervalSet::new([(lo, hi)])
        .map(SetClass::from)
        .map_err(|e| ParseError {
            pos: lo_pos,
            message: e.to_string(),
        })
}

fn parse_atoms(cur: &mut Cursor, space: &Space, pos: crate::lex::Pos) -> PResult<SetClass> {
    cur.expect_punct('{')?;
    let mut indices = Vec::new();
    if !cur.eat_punct('}') {
        loop {
            indices.push(cur.expect_number()? as usize);
            if cur.eat_punct('}') {
                break;
            }
            cur.expect_punct(',')?;
        }
    }
    match space {
        Space::Atoms { weights } => ergolab_core::AtomSet::new(weights.len(), indices)
            .map(SetClass::from)
            .map_err(|e| ParseError {
                pos,
                message: e.to_string(),
            }),
        Space::Product { weights, fiber } => {
            let n = weights.len();
            let mut fibers = vec![SetClass::empty(fiber); n];
            for i in indices {
                if i >= n {
                    return Err(ParseError {
                        pos,
                        message: format!("atom index {i} out of range for n={n}"),
                    });
                }
                fibers[i] = SetClass::full(fiber);
            }
            ProductSet::new(fibers)
                .map(SetClass::from)
                .map_err(|e| ParseError {
                    pos,
                    message: e.to_string(),
                })
        }
        other => Err(ParseError {
            pos,
            message: format!("atoms{{...}} needs an atom or product space, this space is {other}"),
        }),
    }
}

fn parse_fiber(cur: &mut Cursor, space: &Space, pos: crate::lex::Pos) -> PResult<SetClass> {
    let Space::Product { weights, fiber } = space else {
        return Err(ParseError {
            pos,
            message: format!("fiber(...) needs a product space, this space is {space}"),
        });
    };
    cur.expect_punct('(')?;
    let i = cur.expect_number()? as usize;
    if i >= weights.len() {
        return Err(ParseError {
            pos,
            message: format!("atom index {i} out of range for n={}", weights.len()),
        });
    }
    cur.expect_punct(',')?;
    let inner = parse_diff(cur, fiber)?;
    cur.expect_punct(')')?;
    let mut fibers = vec![SetClass::empty(fiber); weights.len()];
    fibers[i] = inner;
    ProductSet::new(fibers)
        .map(SetClass::from)
        .map_err(|e| ParseError {
            pos,
            message: e.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergolab_core::{NumberField, Scalar};

    fn cyl_space() -> Space {
        Space::cylinder(2).unwrap()
    }

    #[test]
    fn union_of_words() {
        let space = cyl_space();
        let s = parse_set_expr("cyl(\"0\") | cyl(\"11\")", &space).unwrap();
        assert_eq!(s.measure(&space).unwrap(), Scalar::rat(3, 4));
    }

    #[test]
    fn complement_of_interval() {
        let space = Space::circle(NumberField::Rational);
        let s = parse_set_expr("~interval(1/3, 1/2)", &space).unwrap();
        assert_eq!(s.measure(&space).unwrap(), Scalar::rat(5, 6));
        let SetClass::Intervals(iv) = &s else { panic!() };
        assert_eq!(iv.intervals().len(), 2);
    }

    #[test]
    fn full_symdiff_full_is_empty() {
        let space = cyl_space();
        let s = parse_set_expr("full ^ full", &space).unwrap();
        assert!(s.is_null());
    }

    #[test]
    fn precedence_tightest_first() {
        let space = cyl_space();
        // ~ binds before &, & before ^, ^ before |, | before \.
        let a = parse_set_expr("~cyl(\"0\") & full", &space).unwrap();
        assert_eq!(a, parse_set_expr("(~cyl(\"0\")) & full", &space).unwrap());
        let b = parse_set_expr("cyl(\"0\") | cyl(\"1\") \\ cyl(\"1\")", &space).unwrap();
        assert_eq!(
            b,
            parse_set_expr("(cyl(\"0\") | cyl(\"1\")) \\ cyl(\"1\")", &space).unwrap()
        );
    }

    #[test]
    fn type_mismatches_are_errors() {
        let space = cyl_space();
        assert!(parse_set_expr("interval(0, 1/2)", &space).is_err());
        assert!(parse_set_expr("atoms{0}", &space).is_err());
        let circle = Space::circle(NumberField::Rational);
        assert!(parse_set_expr("cyl(\"0\")", &circle).is_err());
        // Field discipline: golden endpoints are rejected on a rational circle.
        assert!(parse_set_expr("interval(0, (-1/2 + 1/2*sqrt(5)))", &circle).is_err());
        let golden_circle = Space::circle(NumberField::Quadratic(5));
        assert!(parse_set_expr("interval(0, (-1/2 + 1/2*sqrt(5)))", &golden_circle).is_ok());
    }

    #[test]
    fn range_errors() {
        let space = cyl_space();
        assert!(parse_set_expr("cyl(\"2\")", &space).is_err());
        let circle = Space::circle(NumberField::Rational);
        assert!(parse_set_expr("interval(1/2, 1/3)", &circle).is_err());
        assert!(parse_set_expr("interval(1/2, 3/2)", &circle).is_err());
        let atoms = Space::uniform_atoms(3);
        assert!(parse_set_expr("atoms{5}", &atoms).is_err());
    }

    #[test]
    fn product_atoms_and_fiber() {
        let space = Space::product(
            vec![Scalar::rat(1, 2), Scalar::rat(1, 2)],
            cyl_space(),
        )
        .unwrap();
        let a = parse_set_expr("atoms{0}", &space).unwrap();
        assert_eq!(a.measure(&space).unwrap(), Scalar::rat(1, 2));
        let b = parse_set_expr("fiber(1, cyl(\"0\"))", &space).unwrap();
        assert_eq!(b.measure(&space).unwrap(), Scalar::rat(1, 4));
        assert!(a.intersect(&b).unwrap().is_null());
    }

    #[test]
    fn display_round_trips() {
        let spaces_and_exprs = [
            (cyl_space(), "cyl(\"01\") | cyl(\"10\")"),
            (Space::circle(NumberField::Rational), "interval(1/8, 1/2)"),
            (Space::uniform_atoms(4), "atoms{1,3}"),
        ];
        for (space, text) in &spaces_and_exprs {
            let parsed = parse_set_expr(text, space).unwrap();
            let rendered = parsed.to_string();
            let reparsed = parse_set_expr(&rendered, space).unwrap();
            assert_eq!(parsed, reparsed, "{text} -> {rendered}");
        }
    }
}
