//! Minimal scripted HTTP/1.1 server for exercising the chat client over
//! loopback. Each script step handles exactly one request; the server
//! records what it saw and replies (or hangs) per the step.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread::{self, JoinHandle};
use std::time::Duration;

pub struct Recorded {
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Recorded {
    pub fn header(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.headers.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str())
    }

    pub fn body_json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).expect("request body is JSON")
    }
}

pub enum Step {
    /// Respond with this status and raw body.
    Reply { status: u16, body: String },
    /// Respond 200 with a chat-completion envelope around this text.
    ChatText(String),
    /// Read the request, then hold the connection open without answering.
    Hang { hold_ms: u64 },
}

pub struct StubServer {
    pub base_url: String,
    handle: JoinHandle<Vec<Recorded>>,
}

impl StubServer {
    pub fn start(script: Vec<Step>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let addr = listener.local_addr().expect("local addr");
        let handle = thread::spawn(move || {
            let mut recorded = Vec::new();
            for step in script {
                let (mut stream, _) = listener.accept().expect("accept");
                recorded.push(read_request(&mut stream));
                match step {
                    Step::Reply { status, body } => write_response(&mut stream, status, &body),
                    Step::ChatText(text) => {
                        write_response(&mut stream, 200, &chat_body(&text));
                    }
                    Step::Hang { hold_ms } => {
                        thread::sleep(Duration::from_millis(hold_ms));
                    }
                }
            }
            recorded
        });
        StubServer { base_url: format!("http://{addr}"), handle }
    }

    /// Waits for the whole script to be consumed and returns the requests.
    pub fn finish(self) -> Vec<Recorded> {
        self.handle.join().expect("server thread")
    }
}

pub fn chat_body(text: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": text}}]
    })
    .to_string()
}

fn read_request(stream: &mut TcpStream) -> Recorded {
    let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
    let mut line = String::new();
    reader.read_line(&mut line).expect("request line");
    let path = line.split_whitespace().nth(1).unwrap_or("").to_string();

    let mut headers = Vec::new();
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).expect("header line");
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            let name = name.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if name == "content-length" {
                content_length = value.parse().unwrap_or(0);
            }
            headers.push((name, value));
        }
    }

    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).expect("request body");
    Recorded { path, headers, body: String::from_utf8_lossy(&body).into_owned() }
}

fn write_response(stream: &mut TcpStream, status: u16, body: &str) {
    let response = format!(
        "HTTP/1.1 {status} Scripted\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(response.as_bytes()).expect("write response");
    stream.flush().expect("flush response");
}
