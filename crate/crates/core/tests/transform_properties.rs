use metarepair_core::interpreter::{differential_check, generate_program, Verdict};
use metarepair_core::naming::DictionaryProvider;
use metarepair_core::syntax::{parse_method, print_method, structurally_equal};
use metarepair_core::transforms::{
    apply_all, apply_structural, find_sites, transformed_node_count, SkipReason, TransformKind,
};

const BUDGET: usize = 60;

#[test]
fn generated_programs_keep_their_behaviour() {
    let dict = DictionaryProvider::bundled();
    for seed in 0..150u64 {
        let m = generate_program(seed, BUDGET);
        let t = apply_all(&m, &dict, &[]).unwrap();
        if let Verdict::Fail(cx) = differential_check(&m, &t.method, &t.rename_map, 64, seed) {
            panic!(
                "seed {seed}\n{}\n---\n{}\nargs {:?}\noriginal {:?}\ntransformed {:?}",
                print_method(&m),
                print_method(&t.method),
                cx.args,
                cx.original,
                cx.transformed
            );
        }
    }
}

#[test]
fn output_reparses_to_the_same_tree() {
    let dict = DictionaryProvider::bundled();
    for seed in 0..150u64 {
        let t = apply_all(&generate_program(seed, BUDGET), &dict, &[]).unwrap();
        let printed = print_method(&t.method);
        let back = parse_method(&printed).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{printed}"));
        assert!(structurally_equal(&back, &t.method), "seed {seed}\n{printed}");
        assert_eq!(print_method(&back), printed);
    }
}

#[test]
fn counts_match_edits() {
    let dict = DictionaryProvider::bundled();
    for seed in 0..150u64 {
        let t = apply_all(&generate_program(seed, BUDGET), &dict, &[]).unwrap();
        assert_eq!(transformed_node_count(&t.method), t.total_applied(), "seed {seed}");
        for r in &t.records {
            assert_eq!(r.applied_count, r.sites.len());
        }
    }
}

#[test]
fn nothing_left_to_apply() {
    let dict = DictionaryProvider::bundled();
    for seed in 0..150u64 {
        let t = apply_all(&generate_program(seed, BUDGET), &dict, &[]).unwrap();
        for kind in TransformKind::ALL {
            let (sites, _) = find_sites(kind, &t.method);
            assert!(sites.is_empty(), "seed {seed} {kind}: {sites:?}\n{}", print_method(&t.method));
        }
        for kind in
            [TransformKind::RevIf, TransformKind::NestEI, TransformKind::SEO, TransformKind::SRO, TransformKind::EUI]
        {
            let (again, rec) = apply_structural(kind, &t.method);
            assert_eq!(rec.applied_count, 0, "seed {seed} {kind}");
            assert_eq!(again, t.method);
            let marked = rec.skipped.iter().filter(|s| s.reason == SkipReason::AlreadyTransformed).count();
            let before = t.record(kind).unwrap().applied_count;
            if matches!(kind, TransformKind::SEO | TransformKind::SRO | TransformKind::RevIf) && before > 0 {
                assert!(marked > 0, "seed {seed} {kind}");
            }
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
    #[test]
    fn printing_is_a_fixed_point(seed in 0u64..1_000_000, budget in 5usize..80) {
        let m = generate_program(seed, budget);
        let printed = print_method(&m);
        let back = parse_method(&printed).unwrap();
        proptest::prop_assert!(structurally_equal(&back, &m));
        proptest::prop_assert_eq!(print_method(&back), printed);
    }
}
