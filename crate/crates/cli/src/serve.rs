use std::fs;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use fdf_core::route::RouteNetwork;
use fdf_datacenter::Datacenter;
use tokio::net::TcpListener;

use crate::{Classify, CliError, ServeArgs};

pub(crate) fn load_network(path: &std::path::Path) -> Result<RouteNetwork, CliError> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
    let network = RouteNetwork::from_json(&text).with_context(|| format!("parsing {}", path.display())).input()?;
    let violations = network.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("  {v}");
        }
        return Err(CliError::Input(anyhow!("{} has {} violation(s)", path.display(), violations.len())));
    }
    Ok(network)
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = interrupt => {}
        _ = terminate => {}
    }
    tracing::info!("shutting down");
}

pub(crate) fn run(args: ServeArgs) -> Result<(), CliError> {
    let network = load_network(&args.routes)?;
    let dc = match &args.data_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).runtime()?;
            Datacenter::open(dir).context("replaying event logs").runtime()?
        }
        None => Datacenter::in_memory(),
    };
    dc.register_network(&network).context("registering the route network").input()?;
    let dc = Arc::new(dc);

    let runtime = tokio::runtime::Runtime::new().runtime()?;
    runtime
        .block_on(async {
            let listener = TcpListener::bind(&args.addr).await.with_context(|| format!("binding {}", args.addr))?;
            let local = listener.local_addr()?;
            // scripts and tests read the bound address from this line
            println!("listening on {local}");
            tracing::info!(%local, routes = network.routes.len(), "datacenter up");
            axum::serve(listener, fdf_datacenter::api::router(dc.clone()))
                .with_graceful_shutdown(shutdown_signal())
                .await
                .context("serving")
        })
        .runtime()?;
    dc.flush().context("flushing event logs").runtime()?;
    println!("stopped; event logs flushed");
    Ok(())
}
