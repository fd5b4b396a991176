use sta_core::operators::BoundedDomain;
use sta_core::optimizer::{sta_minimize, StaParams};

fn main() -> sta_core::Result<()> {
    let dom = BoundedDomain::uniform(5, -10.0, 10.0)?;
    let params = StaParams::default().with_max_iter(300);
    let shifted = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum::<f64>();
    let trace = sta_minimize(shifted, &dom, &params, 42, None)?;
    println!("best {:?}", trace.final_best.as_slice());
    println!("f = {:e} after {} evaluations", trace.final_fitness, trace.evaluations);
    Ok(())
}
