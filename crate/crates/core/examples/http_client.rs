//! OpenAI-style chat-completions client against a local stub server that
//! fails once with 503 before answering, showing the retry behavior.
//!
//! ## Run
//! ```bash
//! cargo run --example http_client
//! ```
//!
//! Point `endpoint_url` at a real server (for example a local vLLM or
//! llama.cpp instance at `http://localhost:8000/v1`) to use a live model.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};

use emr_bench::corpus::CodeSample;
use emr_bench::llm::{extract_code, ChatModel, HttpModel, ModelConfig};
use emr_bench::prompt::{render_rci_initial, PromptTemplate};

static SERVED: AtomicUsize = AtomicUsize::new(0);

fn stub_server() -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/v1", listener.local_addr()?);
    std::thread::spawn(move || {
        for (i, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
                line.clear();
            }
            SERVED.fetch_add(1, Ordering::SeqCst);
            let mut body = vec![0; len];
            let _ = reader.read_exact(&mut body);
            let (status, payload) = if i == 0 {
                ("503 Service Unavailable", r#"{"error":"warming up"}"#.to_string())
            } else {
                let content = "```python\\ndef main():\\n    print(int(input()) * 2)\\n\\n\\nmain()\\n```";
                let reply = format!(
                    r#"{{"choices":[{{"message":{{"role":"assistant","content":"{content}"}},"finish_reason":"stop"}}],"usage":{{"prompt_tokens":42,"completion_tokens":17}}}}"#
                );
                ("200 OK", reply)
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    Ok(url)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ModelConfig::new("local-model", stub_server()?);
    cfg.max_retries = 2;
    cfg.backoff_ms = 50;
    cfg.request_timeout_s = 5.0;
    let model = HttpModel::new(cfg)?;

    let sample = CodeSample::new("p1", "s1", "print(int(input()) * 2)\n")?;
    let conv = render_rci_initial(&sample, &PromptTemplate::default_rci())?;
    let reply = model.chat_complete(&conv)?;
    println!(
        "{} requests (one 503, then success); usage {:?}, truncated {}",
        SERVED.load(Ordering::SeqCst),
        reply.token_usage,
        reply.truncated
    );
    println!("{}", extract_code(&reply.raw_text));
    Ok(())
}
