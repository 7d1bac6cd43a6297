use proptest::prelude::*;
use tencoder::corpus::PROGRAMS;
use tencoder::frontend::{compile, parse, tokenize, Diagnostic, SourceProgram, TokenKind};

fn parse_text(text: &str) -> tencoder::frontend::Program {
    let tokens = tokenize(&SourceProgram::in_memory(text)).expect("lex");
    parse(&tokens).expect("parse")
}

fn errors(text: &str) -> Vec<Diagnostic> {
    compile(&SourceProgram::in_memory(text)).expect_err("should be rejected")
}

fn has_error(text: &str, needle: &str) -> bool {
    errors(text).iter().any(|d| d.message.contains(needle))
}

#[test]
fn corpus_round_trips_through_printer() {
    for (name, src) in PROGRAMS {
        let ast = parse_text(src);
        let printed = ast.to_string();
        let again = parse_text(&printed);
        assert_eq!(ast, again, "{name}");
        assert_eq!(printed, again.to_string(), "{name}");
    }
}

#[test]
fn lfsr_resolves_with_global_register() {
    let src = PROGRAMS.iter().find(|(n, _)| *n == "lfsr19").unwrap().1;
    let r = compile(&SourceProgram::in_memory(src)).unwrap();
    assert_eq!(r.input_width(), 19);
    assert_eq!(r.output_width(), 8);
    let reg = r.scopes.lookup(tencoder::frontend::ScopeTree::ROOT, "reg");
    assert!(reg.is_some());
}

#[test]
fn empty_main_is_valid() {
    let r = compile(&SourceProgram::in_memory("void main() {}")).unwrap();
    assert_eq!(r.input_width(), 0);
}

#[test]
fn missing_main() {
    assert!(has_error("__in bit x; __out bit y;", "missing entry point"));
}

#[test]
fn attributes_need_bit_globals() {
    assert!(has_error("__out int k; void main() {}", "requires a `bit` declaration"));
    assert!(has_error("void main() { __in bit x; }", "only allowed on global"));
}

#[test]
fn name_errors() {
    assert!(has_error("__out bit y; void main() { y = q; }", "undeclared identifier `q`"));
    assert!(has_error("bit a; bit a; void main() {}", "duplicate declaration of `a`"));
}

#[test]
fn loop_bound_must_be_constant() {
    let src = "__in bit x; __out bit y; void main() { for (int i = 0; i < x; i++) { y = x; } }";
    let ds = errors(src);
    assert!(!ds.is_empty());
}

#[test]
fn constant_index_out_of_bounds() {
    assert!(has_error("__in bit x[2]; __out bit y; void main() { y = x[2]; }", "out of bounds"));
}

#[test]
fn declaration_lexes_to_three_tokens() {
    let toks = tokenize(&SourceProgram::in_memory("bit x;")).unwrap();
    assert_eq!(toks.len(), 3, "{toks:?}");
    assert!(matches!(toks[1].kind, TokenKind::Ident(ref s) if s == "x"));
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (0usize..4).prop_map(|i| format!("x[{i}]")),
        Just("0".to_string()),
        Just("1".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["&", "|", "^", "+", "-", "*"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            inner.clone().prop_map(|a| format!("~{a}")),
            (inner.clone(), 0usize..3).prop_map(|(a, k)| format!("({a} << {k})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("{a} ^ {b} & {a}")),
        ]
    })
}

fn wrap(e: &str) -> String {
    format!("__in bit x[4];\n__in bit y[4];\n__out bit z[4];\nvoid main() {{\n    z = {e};\n}}\n")
}

proptest! {
    #[test]
    fn printed_programs_reparse_identically(e in expr()) {
        let ast = parse_text(&wrap(&e));
        let printed = ast.to_string();
        prop_assert_eq!(&ast, &parse_text(&printed));
        let r1 = compile(&SourceProgram::in_memory(wrap(&e)));
        let r2 = compile(&SourceProgram::in_memory(wrap(&e)));
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn diagnostics_point_into_the_input(text in "[ -~\n]{0,80}") {
        if let Err(ds) = compile(&SourceProgram::in_memory(text.clone())) {
            let lines: Vec<&str> = text.split('\n').collect();
            for d in ds {
                prop_assert!(!d.message.is_empty());
                let line = d.pos.line as usize;
                prop_assert!(line >= 1 && line <= lines.len(), "{:?} in {:?}", d, text);
                prop_assert!(d.pos.col >= 1 && d.pos.col as usize <= lines[line - 1].len() + 1, "{:?}", d);
            }
        }
    }

    #[test]
    fn token_soup_diagnostics_are_positioned(
        toks in prop::collection::vec(prop::sample::select(vec![
            "bit", "int", "void", "main", "(", ")", "{", "}", "[", "]", ";", "=", "x", "y",
            "__in", "__out", "if", "else", "for", "return", "assert", "1", "+", "^", "<<", "\n",
        ]), 0..40)
    ) {
        let text = toks.join(" ");
        if let Err(ds) = compile(&SourceProgram::in_memory(text.clone())) {
            let lines: Vec<&str> = text.split('\n').collect();
            for d in ds {
                let line = d.pos.line as usize;
                prop_assert!(line >= 1 && line <= lines.len(), "{:?} in {:?}", d, text);
                prop_assert!(d.pos.col >= 1 && d.pos.col as usize <= lines[line - 1].len() + 1, "{:?}", d);
            }
        }
    }
}
