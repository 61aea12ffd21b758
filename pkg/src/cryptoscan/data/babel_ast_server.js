// Line-protocol AST server: one JSON request per line on stdin, one JSON
// response per line on stdout. Exits when stdin closes.
//
// Request:  {"id": n, "source": "...", "dialect": "js"|"ts"|"tsx"}
// Response: {"id": n, "ok": true, "ast": {...}, "errors": [...]}        (parsed; errors = recovered syntax errors)
//           {"id": n, "ok": false, "error": "...", "line": lineno}      (unrecoverable at lineno)

"use strict";

const readline = require("readline");

function loadParser() {
  const candidates = ["@babel/parser"];
  if (process.env.CRYPTOSCAN_BABEL_PARSER) {
    candidates.unshift(process.env.CRYPTOSCAN_BABEL_PARSER);
  }
  for (const name of candidates) {
    try {
      return require(name);
    } catch (err) {
      // try next candidate
    }
  }
  process.stdout.write(JSON.stringify({ fatal: "cannot resolve @babel/parser" }) + "\n");
  process.exit(3);
}

const parser = loadParser();

function pluginsFor(dialect) {
  if (dialect === "ts") return ["typescript", "decorators-legacy"];
  if (dialect === "tsx") return [["typescript", { isTSX: true }], "jsx", "decorators-legacy"];
  return ["decorators-legacy"];
}

function parseOne(request) {
  const options = {
    sourceType: "unambiguous",
    errorRecovery: true,
    ranges: true,
    attachComment: false,
    plugins: pluginsFor(request.dialect),
  };
  try {
    const ast = parser.parse(request.source, options);
    const errors = (ast.errors || []).map((e) => ({
      message: String(e.reasonCode || e.message || "error"),
      line: e.loc ? e.loc.line : null,
    }));
    return { id: request.id, ok: true, ast: ast.program, errors: errors };
  } catch (err) {
    return {
      id: request.id,
      ok: false,
      error: String(err.message || err),
      line: err.loc ? err.loc.line : null,
    };
  }
}

function encode(value) {
  // BigInt literals surface as bigint node values; JSON has no bigint.
  return JSON.stringify(value, (key, v) => (typeof v === "bigint" ? v.toString() : v));
}

const rl = readline.createInterface({ input: process.stdin, terminal: false });
rl.on("line", (line) => {
  if (!line.trim()) return;
  let request;
  try {
    request = JSON.parse(line);
  } catch (err) {
    process.stdout.write(encode({ id: null, ok: false, error: "bad request" }) + "\n");
    return;
  }
  let response;
  try {
    response = encode(parseOne(request));
  } catch (err) {
    response = encode({ id: request.id, ok: false, error: String(err && err.message), line: null });
  }
  process.stdout.write(response + "\n");
});
rl.on("close", () => process.exit(0));
