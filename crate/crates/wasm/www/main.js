import init, { generate, verifyArray, locate } from "./pkg/locaray_wasm.js";

const PRINTER = `# Printer options: orientation, size, color, duplex.
2,2,2,3
10 2
0 0 0 0
0 0 0 2
0 0 1 1
0 1 1 0
0 1 1 2
1 0 0 0
1 0 0 1
1 0 1 2
1 1 0 0
1 1 1 1
`;

const $ = (id) => document.getElementById(id);
const status = $("status");

let current = null; // { array, domains } of the array in the grid
let failing = new Set();
let hits = []; // [[factor (1-based), value]] of the located interaction

function show(text, cls = "") {
  status.className = cls;
  status.textContent = text;
}

function call(fn) {
  try {
    return JSON.parse(fn());
  } catch (e) {
    show(String(e.message ?? e), "error");
    return null;
  }
}

function renderGrid() {
  const grid = $("grid");
  grid.textContent = "";
  if (!current) return;
  const table = document.createElement("table");
  table.className = "grid";
  const head = table.insertRow();
  head.appendChild(document.createElement("th"));
  current.domains.forEach((_, j) => {
    const th = document.createElement("th");
    th.textContent = `f${j + 1}`;
    head.appendChild(th);
  });
  current.array.forEach((row, i) => {
    const tr = table.insertRow();
    const n = i + 1;
    if (failing.has(n)) tr.className = "failing";
    const th = document.createElement("th");
    th.textContent = n;
    th.title = "toggle failing";
    th.onclick = () => toggle(n);
    tr.appendChild(th);
    row.forEach((v, j) => {
      const td = tr.insertCell();
      td.textContent = v;
      td.className = `v${v % 6}`;
      if (failing.has(n) && hits.some(([f, val]) => f === j + 1 && val === v)) td.classList.add("hit");
    });
  });
  grid.appendChild(table);
}

function syncFailing() {
  $("failing").value = [...failing].sort((a, b) => a - b).join(",");
}

function toggle(n) {
  failing.has(n) ? failing.delete(n) : failing.add(n);
  syncFailing();
  runLocate();
}

function runVerify() {
  const r = call(() => verifyArray($("text").value, 0));
  if (!r) return;
  current = { array: r.array, domains: r.domains };
  failing = new Set();
  hits = [];
  syncFailing();
  const lines = [
    `model ${r.model}, ${r.array.length} rows, strength ${r.strength}`,
    `covering: ${r.is_covering}   locating: ${r.is_locating_1bar}`,
    `uncovered: ${r.uncovered_count}   colliding pairs: ${r.collision_count}`,
  ];
  if (r.uncovered.length) lines.push("", "uncovered:", ...r.uncovered.map((u) => "  " + u.label));
  if (r.collisions.length) {
    lines.push("", "collisions:");
    for (const c of r.collisions) lines.push(`  ${c.first.label} ${c.second.label} rows {${c.rows.join(", ")}}`);
  }
  show(lines.join("\n"), r.is_locating_1bar ? "ok" : "");
  renderGrid();
}

function runLocate() {
  if (!current) return;
  const r = call(() => locate($("text").value, $("failing").value, 0));
  if (!r) return;
  failing = new Set(r.failing);
  hits = r.matches.length === 1 ? r.matches[0].pairs : [];
  let msg;
  if (r.failing.length === 0) msg = "No failing rows: no fault.";
  else if (r.matches.length === 0) msg = `No interaction is covered by exactly rows {${r.failing.join(", ")}}.`;
  else msg = `Rows {${r.failing.join(", ")}} point to:\n` + r.matches.map((m) => "  " + m.label).join("\n");
  show(msg + "\n\nInteractions are {(factor, value), ...} with 1-based factors.", r.matches.length === 1 ? "ok" : "");
  renderGrid();
}

function runGenerate() {
  show("Searching…");
  $("history").textContent = "";
  // Let the status paint before the search blocks the thread.
  setTimeout(() => {
    const r = call(() =>
      generate($("model").value, Number($("strength").value), BigInt($("seed").value || 0), $("strategy").value, Number($("timeout").value)),
    );
    if (!r) return;
    const h = $("history");
    for (const p of r.history) {
      const s = document.createElement("span");
      s.className = p.found ? "found" : "failed";
      s.textContent = `${p.phase === "binary" ? "B" : "S"}${p.size}`;
      h.appendChild(s);
    }
    if (r.rows === null) {
      show(`No array within the timeout (${r.history.length} runs).`, "error");
      return;
    }
    $("text").value = r.text;
    runVerify();
    show(
      `${r.rows} rows for ${r.model} at strength ${r.strength} (${r.interactions} interactions)\n` +
        `search range started at [${r.bounds[0]}, ${r.bounds[1]}], ${r.history.length} runs, ${(r.elapsed_ms / 1000).toFixed(1)} s` +
        (r.timed_out ? ", stopped by timeout" : "") +
        `\nindependently verified: ${r.verified}`,
      r.verified ? "ok" : "error",
    );
  }, 20);
}

await init();
$("text").value = PRINTER;
$("generate").onclick = runGenerate;
$("verify").onclick = runVerify;
$("locate").onclick = runLocate;
$("clear").onclick = () => {
  failing = new Set();
  hits = [];
  syncFailing();
  renderGrid();
  show("");
};
runVerify();
