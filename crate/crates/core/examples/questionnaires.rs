//! Score NASA-TLX and the nine-item usability questionnaire, then check
//! internal consistency.

use assist_sim::metrics::{cronbach_alpha, raw_tlx, reverse_coded, usability_alpha, usability_composite, TlxResponse, UsabilityResponse};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tlx = [
        TlxResponse { items: [2.0, 1.0, 3.0, 2.0, 2.0, 1.0] },
        TlxResponse { items: [4.0, 2.0, 3.0, 3.0, 4.0, 5.0] },
    ];
    for r in &tlx {
        println!("TLX {:?} -> {:.2}", r.items, raw_tlx(r)?);
    }

    let usab = [
        UsabilityResponse { items: [5.0, 1.0, 5.0, 1.0, 5.0, 4.0, 4.0, 4.0, 4.0] },
        UsabilityResponse { items: [4.0, 2.0, 4.0, 2.0, 4.0, 4.0, 3.0, 4.0, 4.0] },
        UsabilityResponse { items: [3.0, 3.0, 3.0, 2.0, 3.0, 3.0, 3.0, 2.0, 3.0] },
        UsabilityResponse { items: [5.0, 2.0, 4.0, 1.0, 5.0, 5.0, 4.0, 5.0, 4.0] },
    ];
    for r in &usab {
        println!("usability {:?} -> {:.2} (recoded {:?})", r.items, usability_composite(r)?, reverse_coded(r));
    }
    println!("usability alpha {:.3}", usability_alpha(&usab)?);

    let matrix = vec![vec![2.0, 3.0, 3.0], vec![4.0, 4.0, 5.0], vec![3.0, 5.0, 4.0]];
    println!("alpha of a 3x3 fixture {:.4}", cronbach_alpha(&matrix)?);
    Ok(())
}
