mod props;

const CASES: u32 = 1000;

fn suite(name: &str) {
    let (_, props) = props::suites().into_iter().find(|(n, _)| *n == name).unwrap();
    for p in props {
        if let Err(e) = (p.run)(CASES) {
            panic!("{}: {}", p.name, e);
        }
    }
}

#[test]
fn recomposition() {
    suite("recomposition");
}

#[test]
fn numeric() {
    suite("numeric");
}

#[test]
fn equality() {
    suite("equality");
}

#[test]
fn cells() {
    suite("cells");
}
