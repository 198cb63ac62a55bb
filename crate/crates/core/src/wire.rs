//! Customer/cloud wire protocol.
//!
//! Every message is a 4-byte big-endian length followed by that many bytes
//! of UTF-8 JSON. Requests are `{"type":"solve","problem":<EncryptedProblem>}`;
//! responses are `{"type":"result","result":<CloudResult>}` or
//! `{"type":"error","code":<u16>,"message":<string>}`.
//!
//! The server side only links against [`EncryptedProblem`] and
//! [`proof_gen`]; it has no access to keys or plaintext problems.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::problem::{EncryptedProblem, Tolerance};
use crate::solver::{proof_gen, CloudResult};

/// Upper bound on a single frame body.
pub const MAX_FRAME: usize = 256 << 20;

pub const BAD_REQUEST: u16 = 400;
pub const UNPROCESSABLE: u16 = 422;
pub const INTERNAL: u16 = 500;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Result { result: CloudResult },
    Error { code: u16, message: String },
}

#[derive(Serialize)]
struct SolveRequest<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    problem: &'a EncryptedProblem,
}

pub fn encode_frame(body: &[u8]) -> Result<Vec<u8>> {
    if body.len() > MAX_FRAME {
        return Err(Error::Protocol(format!("frame of {} bytes exceeds limit", body.len())));
    }
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    Ok(out)
}

/// Decodes a buffer holding exactly one frame.
pub fn decode_frame(bytes: &[u8]) -> Result<&[u8]> {
    let Some((header, body)) = bytes.split_first_chunk::<4>() else {
        return Err(Error::Protocol("frame shorter than its length prefix".into()));
    };
    let declared = u32::from_be_bytes(*header) as usize;
    if declared != body.len() {
        return Err(Error::Protocol(format!(
            "declared length {declared} but body has {} bytes",
            body.len()
        )));
    }
    Ok(body)
}

pub fn write_frame<W: Write>(w: &mut W, body: &[u8]) -> Result<()> {
    w.write_all(&encode_frame(body)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before the header.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut header = [0u8; 4];
    match r.read_exact(&mut header) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME {
        return Err(Error::Protocol(format!("declared length {len} exceeds limit")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => {
            Error::Protocol(format!("stream ended inside a {len}-byte frame"))
        }
        _ => Error::Io(e),
    })?;
    Ok(Some(body))
}

fn error_response(code: u16, message: impl Into<String>) -> Response {
    Response::Error {
        code,
        message: message.into(),
    }
}

const PLAINTEXT_KEYS: [&str; 4] = ["A", "B", "b", "c"];

/// Handles one request body. Never panics on malformed input.
pub fn handle_request(body: &[u8], tol: &Tolerance) -> Response {
    let value: Value = match serde_json::from_slice(body) {
        Ok(v) => v,
        Err(e) => return error_response(BAD_REQUEST, format!("malformed JSON: {e}")),
    };
    if value.get("type").and_then(Value::as_str) != Some("solve") {
        return error_response(BAD_REQUEST, "expected type \"solve\"");
    }
    let Some(problem) = value.get("problem").and_then(Value::as_object) else {
        return error_response(BAD_REQUEST, "missing problem object");
    };
    if PLAINTEXT_KEYS.iter().any(|k| problem.contains_key(*k)) {
        return error_response(BAD_REQUEST, "plaintext problem fields are not accepted");
    }
    let problem: EncryptedProblem = match serde_json::from_value(Value::Object(problem.clone())) {
        Ok(p) => p,
        Err(e) => return error_response(BAD_REQUEST, format!("invalid problem: {e}")),
    };
    if let Err(e) = problem.check_shape() {
        return error_response(BAD_REQUEST, e.to_string());
    }
    match proof_gen(&problem, tol) {
        Ok(result) => Response::Result { result },
        Err(e @ Error::SelfCheckFailed(_)) => error_response(INTERNAL, e.to_string()),
        Err(e) => error_response(UNPROCESSABLE, e.to_string()),
    }
}

fn serve_connection(mut stream: TcpStream, tol: Tolerance) -> Result<()> {
    loop {
        let body = match read_frame(&mut stream) {
            Ok(Some(body)) => body,
            Ok(None) => return Ok(()),
            Err(e @ Error::Protocol(_)) => {
                let reply = serde_json::to_vec(&error_response(BAD_REQUEST, e.to_string()))?;
                let _ = write_frame(&mut stream, &reply);
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        let reply = serde_json::to_vec(&handle_request(&body, &tol))?;
        write_frame(&mut stream, &reply)?;
    }
}

/// Accepts connections forever, one thread per connection.
pub fn serve(listener: TcpListener, tol: Tolerance) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            if let Err(e) = serve_connection(stream, tol) {
                log_error(&e);
            }
        });
    }
    Ok(())
}

fn log_error(e: &Error) {
    eprintln!("connection closed with error: {e}");
}

/// Binds `127.0.0.1:port` (port 0 picks a free one) and serves in a
/// background thread. Returns the bound address.
pub fn spawn_server(port: u16, tol: Tolerance) -> Result<SocketAddr> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    let addr = listener.local_addr()?;
    thread::spawn(move || serve(listener, tol));
    Ok(addr)
}

/// Sends one solve request and waits for the answer.
pub fn request<A: ToSocketAddrs>(addr: A, e: &EncryptedProblem) -> Result<CloudResult> {
    let mut stream = TcpStream::connect(addr).map_err(Error::ConnectionFailed)?;
    let body = serde_json::to_vec(&SolveRequest {
        kind: "solve",
        problem: e,
    })?;
    write_frame(&mut stream, &body)?;
    let reply = read_frame(&mut stream)?
        .ok_or_else(|| Error::Protocol("server closed the connection without replying".into()))?;
    match serde_json::from_slice::<Response>(&reply)
        .map_err(|e| Error::Protocol(format!("unreadable response: {e}")))?
    {
        Response::Result { result } => Ok(result),
        Response::Error { code, message } => Err(Error::Server { code, message }),
    }
}
