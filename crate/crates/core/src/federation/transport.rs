//! Message channels between the server and each site.

use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::{Duration, Instant};

use super::wire::{read_frame, write_frame, WireMessage};
use crate::{Error, Result};

/// One end of a reliable, ordered, point-to-point message channel.
pub trait Channel: Send {
    fn send(&mut self, msg: &WireMessage) -> Result<()>;
    /// Waits for the next message; `Ok(None)` means the timeout elapsed.
    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<WireMessage>>;
}

impl<C: Channel + ?Sized> Channel for Box<C> {
    fn send(&mut self, msg: &WireMessage) -> Result<()> {
        (**self).send(msg)
    }

    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<WireMessage>> {
        (**self).recv(timeout)
    }
}

pub struct InProcessChannel {
    tx: Sender<WireMessage>,
    rx: Receiver<WireMessage>,
}

impl Channel for InProcessChannel {
    fn send(&mut self, msg: &WireMessage) -> Result<()> {
        self.tx
            .send(msg.clone())
            .map_err(|_| Error::Transport("peer hung up".into()))
    }

    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<WireMessage>> {
        match timeout {
            None => self
                .rx
                .recv()
                .map(Some)
                .map_err(|_| Error::Transport("peer hung up".into())),
            Some(t) => match self.rx.recv_timeout(t) {
                Ok(m) => Ok(Some(m)),
                Err(RecvTimeoutError::Timeout) => Ok(None),
                Err(RecvTimeoutError::Disconnected) => Err(Error::Transport("peer hung up".into())),
            },
        }
    }
}

/// A connected pair of in-process channel ends.
pub fn in_process_pair() -> (InProcessChannel, InProcessChannel) {
    let (a_tx, a_rx) = mpsc::channel();
    let (b_tx, b_rx) = mpsc::channel();
    (
        InProcessChannel { tx: a_tx, rx: b_rx },
        InProcessChannel { tx: b_tx, rx: a_rx },
    )
}

/// `sites` channel pairs: server ends first, site ends second.
pub fn in_process(sites: usize) -> (Vec<InProcessChannel>, Vec<InProcessChannel>) {
    (0..sites).map(|_| in_process_pair()).unzip()
}

/// Length-prefixed JSON frames over a TCP stream.
pub struct TcpChannel {
    stream: TcpStream,
    timeout: Option<Duration>,
}

impl TcpChannel {
    pub fn new(stream: TcpStream) -> Result<Self> {
        stream.set_nodelay(true)?;
        stream.set_read_timeout(None)?;
        Ok(Self { stream, timeout: None })
    }

    /// Connects, retrying until `patience` runs out (the listener may still be starting).
    pub fn connect<A: ToSocketAddrs + Clone>(addr: A, patience: Duration) -> Result<Self> {
        let start = Instant::now();
        loop {
            match TcpStream::connect(addr.clone()) {
                Ok(s) => return Self::new(s),
                Err(e) if start.elapsed() < patience => {
                    log::debug!("connect failed ({e}); retrying");
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(Error::Transport(format!("connect failed: {e}"))),
            }
        }
    }
}

impl Channel for TcpChannel {
    fn send(&mut self, msg: &WireMessage) -> Result<()> {
        write_frame(&mut self.stream, msg).map_err(|e| match e {
            Error::Io(io) => Error::Transport(io.to_string()),
            other => other,
        })
    }

    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<WireMessage>> {
        if timeout != self.timeout {
            self.stream.set_read_timeout(timeout)?;
            self.timeout = timeout;
        }
        read_frame(&mut self.stream)
    }
}

/// Binds the server side of a TCP federation.
pub struct TcpHub {
    listener: TcpListener,
}

impl TcpHub {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::Transport(format!("bind failed: {e}")))?;
        Ok(Self { listener })
    }

    pub fn local_addr(&self) -> Result<std::net::SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts exactly `sites` connections.
    pub fn accept(&self, sites: usize) -> Result<Vec<TcpChannel>> {
        (0..sites)
            .map(|_| {
                let (stream, peer) = self
                    .listener
                    .accept()
                    .map_err(|e| Error::Transport(format!("accept failed: {e}")))?;
                log::debug!("site connected from {peer}");
                TcpChannel::new(stream)
            })
            .collect()
    }
}
