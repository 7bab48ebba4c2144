use termorder::text::stem;

#[test]
fn matches_reference_vocabulary() {
    let voc = include_str!("data/porter_voc.txt");
    let out = include_str!("data/porter_output.txt");
    let mut mismatches = Vec::new();
    let mut n = 0;
    for (word, want) in voc.lines().zip(out.lines()) {
        n += 1;
        let got = stem(word);
        if got != want {
            mismatches.push(format!("{word}: got {got}, want {want}"));
        }
    }
    assert_eq!(n, 23531);
    assert!(mismatches.is_empty(), "{} mismatches, first: {:?}", mismatches.len(), &mismatches[..mismatches.len().min(10)]);
}
