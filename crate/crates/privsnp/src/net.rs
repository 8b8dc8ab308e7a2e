//! Line-delimited JSON over TCP: one request per line, one response line
//! back, in order.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use crate::error::{Error, Result};
use crate::service::CspService;
use crate::wire::{Request, Response};

/// Accepts connections until the listener fails; one thread each.
pub fn serve_on(listener: TcpListener, service: CspService) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let service = service.clone();
        std::thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            if let Err(e) = session(stream, &service) {
                log::debug!("connection {peer:?} closed: {e}");
            }
        });
    }
    Ok(())
}

fn session(stream: TcpStream, service: &CspService) -> Result<()> {
    let mut out = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<Request>(&line) {
            Ok(req) => service.handle(req),
            Err(e) => Response::error("bad_request", e),
        };
        let mut text = serde_json::to_string(&resp)?;
        text.push('\n');
        out.write_all(text.as_bytes())?;
        out.flush()?;
    }
}

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        let writer = TcpStream::connect(addr)?;
        Ok(Self { reader: BufReader::new(writer.try_clone()?), writer })
    }

    pub fn call(&mut self, req: &Request) -> Result<Response> {
        let mut text = serde_json::to_string(req)?;
        text.push('\n');
        self.writer.write_all(text.as_bytes())?;
        self.writer.flush()?;
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(Error::Protocol("server closed the connection".into()));
        }
        Ok(serde_json::from_str(&line)?)
    }

    /// Like `call`, but any response other than `Ok` is an error.
    pub fn expect_ok(&mut self, req: &Request) -> Result<()> {
        match self.call(req)? {
            Response::Ok => Ok(()),
            Response::Error { error_code, message } => Err(Error::Protocol(format!("{error_code}: {message}"))),
            other => Err(Error::Protocol(format!("unexpected response {other:?}"))),
        }
    }
}
