#![no_main]

use fredholm_colloc::expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ast) = expr::parse(text) {
        let _ = ast.eval(0.25, 0.75);
        // Printing must produce something the parser accepts again.
        let printed = ast.to_string();
        expr::parse(&printed).expect("printed expression reparses");
    }
});
