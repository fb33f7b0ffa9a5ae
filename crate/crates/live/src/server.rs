//! Websocket host: one [`Session`] per connection.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use pacmodel::bots::game_seed;
use pacmodel::engine::Engine;
use pacmodel::log::GameLog;
use pacmodel::model_behavlet::Model2Config;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio_tungstenite::tungstenite::{Error as WsError, Message};

use crate::protocol::{ClientFrame, ServerFrame};
use crate::session::Session;

/// When ticks happen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    /// Wall-clock cadence.
    Fixed(Duration),
    /// One tick per input frame; for scripted clients.
    Lockstep,
}

impl Clock {
    fn frame_ms(self) -> u64 {
        match self {
            Clock::Fixed(d) => d.as_millis() as u64,
            Clock::Lockstep => 0,
        }
    }
}

pub struct ServerOptions {
    pub engine: Arc<Engine>,
    pub model2: Model2Config,
    pub config_digest: String,
    pub clock: Clock,
    /// Predictions slower than this are marked late and not scored.
    pub budget: Duration,
    /// Seed stream for sessions that do not request a seed.
    pub seed: u64,
    /// Where finished (or abandoned) games are written.
    pub log_dir: Option<PathBuf>,
}

/// Input queue depth between the socket reader and the game loop.
const QUEUE: usize = 64;

/// Accepts connections forever, one task per client.
pub async fn serve(listener: TcpListener, opts: Arc<ServerOptions>) -> std::io::Result<()> {
    let mut next_id = 0u64;
    loop {
        let (stream, peer) = listener.accept().await?;
        let id = next_id;
        next_id += 1;
        let opts = opts.clone();
        tokio::spawn(async move {
            match serve_connection(stream, id, opts).await {
                Ok(Some(log)) => log::info!("session {id} ({peer}) ended after {} ticks", log.records.len()),
                Ok(None) => log::info!("session {id} ({peer}) left before starting"),
                Err(e) => log::warn!("session {id} ({peer}): {e}"),
            }
        });
    }
}

fn text(frame: &ServerFrame) -> Message {
    Message::Text(serde_json::to_string(frame).expect("frames serialize"))
}

/// Runs one session to completion or disconnect. Returns the game log,
/// or `None` if the client never sent `start`.
pub async fn serve_connection(stream: TcpStream, id: u64, opts: Arc<ServerOptions>) -> Result<Option<GameLog>, WsError> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let (tx, mut rx) = mpsc::channel::<ClientFrame>(QUEUE);

    let reader = tokio::spawn(async move {
        while let Some(msg) = source.next().await {
            match msg {
                Ok(Message::Text(t)) => match serde_json::from_str::<ClientFrame>(&t) {
                    Ok(frame) => {
                        if tx.send(frame).await.is_err() {
                            break;
                        }
                    }
                    Err(e) => log::warn!("session {id}: bad frame: {e}"),
                },
                Ok(Message::Close(_)) | Err(_) => break,
                Ok(_) => {}
            }
        }
    });

    let seed = loop {
        match rx.recv().await {
            Some(ClientFrame::Start { seed }) => break seed.unwrap_or_else(|| game_seed(opts.seed, id as usize)),
            Some(ClientFrame::Input { .. }) => continue,
            None => return Ok(None),
        }
    };
    let mut session = Session::new(id, opts.engine.clone(), opts.model2.clone(), &opts.config_digest, seed, opts.budget);
    sink.send(text(&ServerFrame::Init(session.init_frame(opts.clock.frame_ms())))).await?;
    sink.send(text(&ServerFrame::State(session.state_frame(Default::default(), None)))).await?;

    let result = run(&mut session, &mut rx, &mut sink, opts.clock).await;
    reader.abort();
    let log = session.into_log();
    if let Some(dir) = &opts.log_dir {
        let path = dir.join(format!("live-{id:04}-{seed}.jsonl"));
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, log.to_jsonl())) {
            log::warn!("session {id}: cannot write {}: {e}", path.display());
        }
    }
    match result {
        Ok(()) | Err(WsError::ConnectionClosed) | Err(WsError::AlreadyClosed) => Ok(Some(log)),
        Err(e) => Err(e),
    }
}

async fn run<S>(session: &mut Session, rx: &mut mpsc::Receiver<ClientFrame>, sink: &mut S, clock: Clock) -> Result<(), WsError>
where
    S: futures::Sink<Message, Error = WsError> + Unpin,
{
    match clock {
        Clock::Lockstep => {
            while let Some(frame) = rx.recv().await {
                if let ClientFrame::Input { heading } = frame {
                    session.queue_input(heading.into());
                    if let Some(state) = session.advance() {
                        let over = state.game_over;
                        sink.send(text(&ServerFrame::State(state))).await?;
                        if over {
                            break;
                        }
                    }
                }
            }
        }
        Clock::Fixed(period) => {
            let mut interval = tokio::time::interval(period);
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            interval.tick().await;
            loop {
                tokio::select! {
                    _ = interval.tick() => {
                        let Some(state) = session.advance() else { break };
                        let over = state.game_over;
                        sink.send(text(&ServerFrame::State(state))).await?;
                        if over {
                            break;
                        }
                    }
                    frame = rx.recv() => match frame {
                        Some(ClientFrame::Input { heading }) => session.queue_input(heading.into()),
                        Some(ClientFrame::Start { .. }) => {}
                        None => break,
                    },
                }
            }
        }
    }
    let _ = sink.send(Message::Close(None)).await;
    Ok(())
}
