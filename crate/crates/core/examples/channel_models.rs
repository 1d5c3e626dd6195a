//! Block-Markov channels, automatic arrival rates, and trace files.

use queue_regret::env::{
    block_boundaries, generate_arrivals, generate_service_matrix, read_service_trace, resolve_rate,
    write_service_trace, ArrivalModel, ArrivalRate, ChannelModel, Purpose, RngStream, StreamId,
};

fn main() -> queue_regret::Result<()> {
    let (n, t) = (3usize, 20usize);
    println!("block starts for T={t}, m=4: {:?}", block_boundaries(t, 4));

    let model = ChannelModel::BlockMarkov { num_blocks: 4, initial_rate: None };
    let services = generate_service_matrix(&model, t, n, &RngStream::new(5, StreamId::new(Purpose::Services, 1)))?;
    for (s, row) in services.rows().enumerate().take(6) {
        println!("slot {:>2}: {row:.3?}", s + 1);
    }
    println!("channel means {:.3?}", services.column_means());

    let lambda = resolve_rate(ArrivalRate::AUTO, 0.05, Some(&services))?;
    let arrivals = generate_arrivals(
        &ArrivalModel::UniformRate { lambda: ArrivalRate::AUTO, epsilon: 0.05 },
        t,
        &RngStream::new(5, StreamId::new(Purpose::Arrivals, 1)),
        Some(&services),
    )?;
    println!("auto lambda {lambda:.3}; first arrivals {:.3?}", &arrivals[..5]);

    let dir = std::env::temp_dir().join("queue-regret-channel-example");
    std::fs::create_dir_all(&dir).map_err(|e| queue_regret::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("services.csv");
    write_service_trace(&path, &services)?;
    assert_eq!(read_service_trace(&path)?, services);
    println!("round-tripped the matrix through {}", path.display());
    Ok(())
}
