use artsel::corpus::{extract_instances, format_record, read_db, tokenize, write_db, NounPhraseInstance};

fn data(name: &str) -> String {
    std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

/// Each blank-line separated fragment is its own document.
fn build(text: &str) -> Vec<NounPhraseInstance> {
    text.split("\n\n")
        .flat_map(|doc| extract_instances(&tokenize(doc)).instances)
        .map(|mut i| {
            i.source_position = None;
            i
        })
        .collect()
}

#[test]
fn fragments_give_the_listed_records() {
    let built = build(&data("listing_fragments.txt"));
    let expected = data("listing.db");
    assert_eq!(write_db(&built), expected);
    assert_eq!(read_db(&expected).unwrap(), built);
}

#[test]
fn records_parse_despite_stray_spaces() {
    // Loose spacing: a blank after "disclose" and before a paren.
    let a = read_db(r#"(("to" "disclose" ) ("the" "price") ("." "Comair"))"#).unwrap();
    let b = read_db(r#"(("1985" ".") ("The" "new" "dividend" "rate") ("is" "payable") )"#).unwrap();
    assert_eq!(format_record(&a[0]), r#"(("to" "disclose") ("the" "price") ("." "Comair"))"#);
    assert_eq!(b[0].premodifiers, ["new", "dividend"]);
    assert_eq!(b[0].head, "rate");
}

#[test]
fn bundled_samples_match_the_generator() {
    use artsel::synthetic::{label_sample, rule_corpus};
    assert_eq!(data("baseline_sample.db"), write_db(&label_sample(672, 328, 1)));
    assert_eq!(data("synthetic.db"), write_db(&rule_corpus(4, 200, 7)));
}
