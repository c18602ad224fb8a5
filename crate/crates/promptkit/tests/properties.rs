use proptest::prelude::*;
use tidyup_core::{ObjectName, Placement, Primitive, PrimitiveChoice, ReceptacleName};
use tidyup_promptkit::*;

fn arb_name() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 ,()'=#-]{0,18}[A-Za-z0-9)]".prop_map(|s| s.to_string())
}

fn arb_examples() -> impl Strategy<Value = ReceptacleExamples> {
    (
        prop::collection::btree_set(arb_name(), 1..8),
        prop::collection::btree_set(arb_name(), 1..4),
    )
        .prop_flat_map(|(objects, receptacles)| {
            let objects: Vec<ObjectName> =
                objects.into_iter().map(|n| ObjectName::new(n).unwrap()).collect();
            let receptacles: Vec<ReceptacleName> =
                receptacles.into_iter().map(|n| ReceptacleName::new(n).unwrap()).collect();
            let n = objects.len();
            let k = receptacles.len();
            prop::collection::vec(0..k, n).prop_map(move |idx| ReceptacleExamples {
                objects: objects.clone(),
                receptacles: receptacles.clone(),
                placements: objects
                    .iter()
                    .zip(&idx)
                    .map(|(o, &i)| Placement::new(o.clone(), receptacles[i].clone()))
                    .collect(),
            })
        })
}

proptest! {
    #[test]
    fn seen_block_round_trips(ex in arb_examples()) {
        let back = parse_receptacle_examples(&ex.render()).unwrap();
        prop_assert_eq!(back, ex);
    }

    #[test]
    fn selection_completion_round_trips(ex in arb_examples()) {
        // a completion that continues the partial first call
        let rendered: Vec<String> = ex
            .placements
            .iter()
            .map(|p| DslStatement::placement(p).to_string())
            .collect();
        let first = &ex.placements[0].object;
        let prefix = format!("pick_and_place(\"{first}\",");
        let completion = format!("{}\n{}", &rendered[0][prefix.len()..], rendered[1..].join("\n"));
        let parsed = parse_placements(first, completion.trim_end()).unwrap();
        prop_assert_eq!(parsed.value, ex.placements.clone());
    }

    #[test]
    fn primitive_block_round_trips(ex in arb_examples(), tosses in prop::collection::vec(any::<bool>(), 8)) {
        let choices: Vec<PrimitiveChoice> = ex
            .objects
            .iter()
            .zip(&tosses)
            .map(|(o, t)| PrimitiveChoice::new(o.clone(), if *t { Primitive::Toss } else { Primitive::Place }))
            .collect();
        let block = PrimitiveExamples { objects: ex.objects.clone(), choices: choices.clone() };
        prop_assert_eq!(parse_primitive_examples(&block.render()).unwrap(), block.clone());
        let calls: Vec<String> = choices.iter().map(|c| DslStatement::primitive(c).to_string()).collect();
        prop_assert_eq!(parse_primitive_choices(&calls.join("\n")).unwrap().value, choices);
    }

    #[test]
    fn builders_are_deterministic(ex in arb_examples()) {
        let a = build_receptacle_summarization_prompt(&ex).unwrap();
        let b = build_receptacle_summarization_prompt(&ex.clone()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn parsers_are_total(text in "\\PC*", prefix in "\\PC{0,12}") {
        let first = ObjectName::new("x").unwrap();
        let _ = parse_summary(&text);
        let _ = parse_placements(&first, &text);
        let _ = parse_primitive_choices(&text);
        let _ = parse_object_list(&prefix, &text);
        let _ = parse_receptacle_examples(&text);
        let _ = parse_primitive_examples(&text);
    }

    #[test]
    fn parsers_are_total_on_dsl_like_text(
        lines in prop::collection::vec(
            prop::sample::select(vec![
                "pick_and_place(", "pick_and_toss(", "\"", "\", \"", ")", "objects = [", "]",
                "# Summary:", "\n", " ", "a", ",", "é", "pick_and_", "=",
            ]),
            0..40,
        )
    ) {
        let text: String = lines.concat();
        let first = ObjectName::new("x").unwrap();
        let _ = parse_placements(&first, &text);
        let _ = parse_primitive_choices(&text);
        let _ = parse_object_list("objects = [\"", &text);
        let _ = parse_receptacle_examples(&text);
    }
}
