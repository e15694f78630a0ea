use geomorph_core::{
    competition, evaluate, fixtures, max_rows, parse_str, smart_init, Axis, ParseError, NULL_MORPHEME,
};
use nalgebra::DMatrix;

#[test]
fn english_shape_and_gold() {
    let file = fixtures::load("english_weak_verb").unwrap();
    let (phi, gold) = file.paradigm().unwrap();
    assert_eq!(file.features.dim(), 7);
    assert_eq!(phi.rows(), 12);
    assert_eq!(gold.morphemes(), [NULL_MORPHEME, "s", "ed"]);
    for (i, label) in phi.labels().iter().enumerate() {
        let want = if label.starts_with("past") {
            "ed"
        } else if label == "present-3rd-sg" {
            "s"
        } else {
            NULL_MORPHEME
        };
        assert_eq!(gold.winner_label(i), Some(want), "{label}");
    }
}

#[test]
fn english_b_is_count_ratios() {
    let (phi, gold) = fixtures::load("english_weak_verb").unwrap().paradigm().unwrap();
    let b = smart_init(&phi, &gold, None).unwrap();
    // rows: past present 1st 2nd 3rd sg pl
    let null = [0.0, 5.0, 2.0, 2.0, 1.0, 2.0, 3.0].map(|x| x / 47f64.sqrt());
    let s = [0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0].map(|x| x / 3f64.sqrt());
    let ed = [6.0, 0.0, 2.0, 2.0, 2.0, 3.0, 3.0].map(|x| x / 66f64.sqrt());
    for (j, col) in [null, s, ed].iter().enumerate() {
        for (v, x) in col.iter().enumerate() {
            assert!((b.get(v, j) - x).abs() < 1e-12, "B[{v},{j}]");
        }
    }
}

#[test]
fn smart_init_scores_per_fixture() {
    // (name, correct, cells, tied cells)
    for (name, correct, cells, ties) in [
        ("english_weak_verb", 12, 12, 0),
        ("german_present", 6, 6, 0),
        ("german_full", 11, 12, 0),
        ("latin_adjectives", 31, 36, 1),
        ("russian_class1", 12, 12, 0),
        ("latin_deponent", 12, 12, 0),
    ] {
        let (phi, gold) = fixtures::load(name).unwrap().paradigm().unwrap();
        let b = smart_init(&phi, &gold, None).unwrap();
        let ev = evaluate(&competition(&phi, &b).unwrap(), &gold).unwrap();
        assert_eq!((ev.correct(), ev.cells.len()), (correct, cells), "{name}");
        assert_eq!(ev.ties.len(), ties, "{name}");
    }
}

#[test]
fn latin_neuter_plural_accusative_is_a_dead_heat() {
    let (phi, gold) = fixtures::load("latin_adjectives").unwrap().paradigm().unwrap();
    let b = smart_init(&phi, &gold, None).unwrap();
    let sel = max_rows(&competition(&phi, &b).unwrap());
    assert_eq!(sel.ties.len(), 1);
    assert_eq!(sel.ties[0].label, "pl-neu-acc");
    assert_eq!(sel.ties[0].morphemes, ["as", "os"]);
    assert!((sel.ties[0].activation - 2.0 / 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn nuer_classes_as_transcribed() {
    let inv = fixtures::load("nuer_classes").unwrap().class_inventory().unwrap();
    let lexemes: Vec<u32> = inv.classes.iter().map(|c| c.lexemes).collect();
    assert_eq!(lexemes, [61, 52, 45, 23, 11, 10, 9, 8, 5, 3, 2, 2, 2, 1, 1, 1]);
    assert_eq!(inv.phi.labels(), ["sg-nom", "sg-gen", "sg-loc", "pl-nom", "pl-gen", "pl-loc"]);
    let row = |label: &str| -> Vec<&str> {
        let gold = &inv.class(label).unwrap().gold;
        (0..6).map(|i| gold.winner_label(i).unwrap()).collect()
    };
    assert_eq!(row("I"), ["∅", "∅", "∅", "∅", "ni", "ni"]);
    assert_eq!(row("III"), ["∅", "kä", "kä", "ni", "ni", "ni"]);
    assert_eq!(row("V"), ["∅", "∅", "∅", "∅", "∅", "∅"]);
    assert_eq!(row("XVI"), ["∅", "∅", "kä", "∅", "∅", "ni"]);
}

/// The published normalized base, used as given: its activations and the
/// paradigm they select.
#[test]
fn printed_nuer_base_activations() {
    let inv = fixtures::load("nuer_classes").unwrap().class_inventory().unwrap();
    #[rustfmt::skip]
    let printed = DMatrix::from_row_slice(5, 3, &[
        0.714, 0.0,   0.817,
        0.275, 0.851, 0.0,
        0.580, 0.133, 0.0,
        0.197, 0.364, 0.416,
        0.195, 0.354, 0.398,
    ]);
    let act = inv.phi.matrix() * &printed;
    let at = |cell: &str, j: usize| act[(inv.phi.labels().iter().position(|l| l == cell).unwrap(), j)];
    for (got, want) in [(at("sg-gen", 2), 1.233), (at("sg-loc", 2), 1.215), (at("pl-gen", 1), 1.215), (at("pl-loc", 1), 1.205)] {
        assert!((got - want).abs() <= 0.002, "{got} vs {want}");
    }
    let winners: Vec<usize> = (0..6).map(|i| (0..3).max_by(|&a, &b| act[(i, a)].total_cmp(&act[(i, b)])).unwrap()).collect();
    let class3: Vec<usize> = inv.class("III").unwrap().gold.winners().iter().map(|w| w.unwrap()).collect();
    assert_eq!(winners, class3);
}

#[test]
fn learned_plural_angles_reproduce_the_forms() {
    let file = fixtures::load("german_plurals_learned").unwrap();
    let m = file.angle_model().unwrap();
    let data = file.angle_data().unwrap();
    assert_eq!(data.forms.len(), 10);
    assert!(m.mismatches(&data.forms).unwrap().is_empty());
    assert_eq!(m.nearest_affix_to_axis(Axis::Y).best.as_deref(), Some(NULL_MORPHEME));
    assert_eq!(m.select_affix("Auto", Axis::X).unwrap().best.as_deref(), Some("s"));
}

#[test]
fn unlearned_plural_file_has_no_angles() {
    let file = fixtures::load("german_plurals").unwrap();
    assert!(!file.has_angles());
    assert!(file.angle_model().is_err());
}

#[test]
fn deponent_base_selects_its_own_paradigm() {
    let (phi, gold) = fixtures::load("latin_deponent").unwrap().paradigm().unwrap();
    let b = smart_init(&phi, &gold, None).unwrap();
    assert_eq!(max_rows(&competition(&phi, &b).unwrap()).tpm, gold);
}

#[test]
fn undeclared_value_is_reported_on_its_line() {
    let src = "FEATURE n: sg pl\nMORPHEMES: a\nCELL sg -> a\nCELL du -> a\n";
    match parse_str(src) {
        Err(ParseError::UndeclaredName { line, name, .. }) => assert_eq!((line, name.as_str()), (4, "du")),
        other => panic!("unexpected {other:?}"),
    }
}
