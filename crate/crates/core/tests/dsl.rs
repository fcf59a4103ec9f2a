use abwscl_core::corpus;
use abwscl_core::dsl::ast::{BinaryOp, Expr, Literal, UnaryOp};
use abwscl_core::dsl::parser::{parse_expr, parse_program};
use abwscl_core::dsl::pretty::{expr, pretty_program};
use abwscl_core::dsl::validate::DiagnosticKind;
use abwscl_core::dsl::{LoadError, Program};
use abwscl_core::term::ActorKind;
use ordered_float::OrderedFloat;
use proptest::prelude::*;

fn kinds(err: LoadError) -> Vec<DiagnosticKind> {
    match err {
        LoadError::Invalid(diags) => diags.into_iter().map(|d| d.kind).collect(),
        other => panic!("expected validation errors, got {other}"),
    }
}

#[test]
fn pristine_corpus_is_accepted() {
    let p = corpus::program();
    assert_eq!(p.of_kind(ActorKind::AA).count(), 10);
    assert_eq!(p.of_kind(ActorKind::WSO).count(), 2);
    assert_eq!(p.of_kind(ActorKind::WS).count(), 2);
    assert_eq!(p.of_kind(ActorKind::WSC).count(), 1);
}

#[test]
fn an_aa_may_not_create() {
    let err = corpus::program_with(&corpus::user_agent_with_creating_aa(), corpus::BOOK_STORE).unwrap_err();
    assert!(kinds(err).contains(&DiagnosticKind::AACannotCreate));
}

#[test]
fn a_ws_needs_set_partner() {
    let err = corpus::program_with(corpus::USER_AGENT, &corpus::book_store_without_set_partner()).unwrap_err();
    assert_eq!(kinds(err), [DiagnosticKind::MissingSetPartner]);
}

#[test]
fn price_mutant_is_still_valid() {
    assert!(corpus::program_with(corpus::USER_AGENT, &corpus::book_store_without_price()).is_ok());
}

#[test]
fn syntax_errors_name_the_file() {
    let err = Program::from_sources([("broken.abwscl", "WS Oops {")]).unwrap_err();
    assert!(matches!(&err, LoadError::Syntax { file, .. } if file == "broken.abwscl"));
    assert!(err.to_string().starts_with("broken.abwscl:"));
}

#[test]
fn undeclared_targets_and_behaviors_are_reported() {
    let src = r#"
AA LoneAA {
    WSO wso-ref
    init(WSO wso) {
        wso-ref := wso
    }
    go() if true {
        nobody <- hello()
    }
}

WSO LoneWSO {
    AA a
    WS ws-ref
    init(WS ws) {
        a := new MissingAA(self)
    }
}
"#;
    let found = kinds(Program::parse(src).unwrap_err());
    assert!(found.contains(&DiagnosticKind::UnknownSendTarget("nobody".into())));
    assert!(found.contains(&DiagnosticKind::UnknownBehavior("MissingAA".into())));
}

#[test]
fn corpus_pretty_prints_to_itself() {
    for (_, src) in corpus::FILES {
        let defs = parse_program(src).unwrap();
        let printed = pretty_program(&defs);
        let again = parse_program(&printed).unwrap();
        assert_eq!(defs, again);
        assert_eq!(printed, pretty_program(&again));
    }
}

fn ident() -> impl Strategy<Value = String> {
    "v[a-z]{0,4}(-[a-z]{1,3})?"
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        Just(Literal::Unit),
        any::<bool>().prop_map(Literal::Bool),
        (0i64..1_000_000).prop_map(Literal::Int),
        (0u32..100_000, 1u32..1000).prop_map(|(a, b)| Literal::Float(OrderedFloat(a as f64 / b as f64))),
        "[a-zA-Z0-9 ]{0,8}".prop_map(Literal::Str),
    ]
}

fn binary_op() -> impl Strategy<Value = BinaryOp> {
    use BinaryOp::*;
    prop::sample::select(vec![Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Rem])
}

fn expression() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![literal().prop_map(Expr::Lit), ident().prop_map(Expr::Var), Just(Expr::SelfRef)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec![UnaryOp::Not, UnaryOp::Neg]), inner.clone())
                .prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (binary_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Expr::List),
            prop::collection::vec((ident(), inner), 0..3).prop_map(|fields| {
                let mut seen = std::collections::BTreeSet::new();
                Expr::Record(fields.into_iter().filter(|(k, _)| seen.insert(k.clone())).collect())
            }),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_round_trip(e in expression()) {
        let printed = expr(&e);
        let back = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(expr(&back), printed);
    }
}
