import init, { simulate_session, extract_session, session_features } from "./pkg/evprofile_wasm.js";

const vehicle = [
  ["i_max", "I max (A)", 8, 40, 0.5, 24],
  ["soc_switch", "SoC switch", 0.5, 0.9, 0.01, 0.7],
  ["tau", "tau (samples)", 10, 150, 1, 60],
  ["d", "offset d (A)", 0, 3, 0.05, 1],
  ["ripple", "ripple (A)", 0, 2, 0.05, 0.8],
  ["noise", "noise (A)", 0, 0.5, 0.01, 0.1],
  ["pilot", "pilot (A)", 6, 48, 1, 32],
  ["soc0", "start SoC", 0, 0.6, 0.01, 0.3],
  ["seed", "seed", 0, 99, 1, 1],
];
const extraction = [
  ["n_avg", "N avg", 1, 60, 1, 25],
  ["epsilon", "epsilon", 0.001, 0.2, 0.001, 0.01],
  ["t_max", "T max", 1, 40, 1, 10],
  ["zeta", "zeta (A)", 0.01, 1, 0.01, 0.1],
];

const val = {};
let session = null;

function sliders(id, specs, onChange) {
  const box = document.getElementById(id);
  for (const [key, text, min, max, step, init] of specs) {
    const label = document.createElement("label");
    label.innerHTML = `<span>${text}</span><input type="range" min="${min}" max="${max}" step="${step}" value="${init}"><output>${init}</output>`;
    const input = label.querySelector("input");
    const out = label.querySelector("output");
    val[key] = init;
    input.addEventListener("input", () => {
      val[key] = Number(input.value);
      out.textContent = input.value;
      onChange();
    });
    box.appendChild(label);
  }
}

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const n = Math.max(1, ...series.map((s) => s.values.length));
  const all = series.flatMap((s) => s.values);
  let lo = Math.min(0, ...all), hi = Math.max(1, ...all);
  if (opts.lo !== undefined) lo = opts.lo;
  const x = (i) => pad + (i / Math.max(1, n - 1)) * (W - 2 * pad);
  const y = (v) => H - pad - ((v - lo) / (hi - lo || 1)) * (H - 2 * pad);
  if (opts.band) {
    ctx.fillStyle = "rgba(21,101,192,0.12)";
    ctx.fillRect(x(opts.band[0]), pad, x(opts.band[1]) - x(opts.band[0]), H - 2 * pad);
  }
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "20px system-ui";
  ctx.fillText(hi.toFixed(1), 2, pad + 6);
  ctx.fillText(lo.toFixed(1), 2, H - pad);
  ctx.fillText(`${n} samples`, W - pad - 130, H - 10);
  for (const m of opts.marks || []) {
    ctx.strokeStyle = m.color;
    ctx.setLineDash([8, 6]);
    ctx.beginPath();
    ctx.moveTo(x(m.at), pad);
    ctx.lineTo(x(m.at), H - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 2;
    ctx.beginPath();
    s.values.forEach((v, i) => (i ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v))));
    ctx.stroke();
  }
}

function simulate() {
  const r = JSON.parse(simulate_session(val.i_max, val.soc_switch, val.tau, val.d, val.ripple,
    val.noise, val.pilot, val.soc0, val.seed));
  if (r.error) {
    session = null;
    status(r.error, true);
    return;
  }
  session = { ...r, current: Float64Array.from(r.current), pilot: Float64Array.from(r.pilot) };
  extract();
}

function status(text, error = false) {
  const el = document.getElementById("status");
  el.textContent = text;
  el.className = error ? "err" : "";
}

function extract() {
  if (!session) return;
  const r = JSON.parse(extract_session(session.current, session.pilot, val.n_avg, val.epsilon, val.t_max, val.zeta));
  if (r.error) {
    status(r.error, true);
    return;
  }
  const marks = session.zero_onset == null ? [] : [{ at: session.zero_onset, color: "#2e7d32" }];
  plot(document.getElementById("session"), [
    { values: Array.from(session.current), color: "#bbb", width: 1 },
    { values: r.filtered_pilot, color: "#e65100" },
    { values: r.filtered_current, color: "#1565c0" },
  ], { band: r.t_start == null ? null : [r.begin, r.t_start], marks });
  if (r.t_start == null) {
    status("no tail found: the filtered current never settles below zeta, or the tail is shorter than N avg");
    plot(document.getElementById("delta"), []);
    document.getElementById("feats").textContent = "";
    return;
  }
  const mean = r.delta_mean;
  const expect = session.effective_offset;
  status(`tail: samples ${r.begin}..${r.t_start} (s = ${r.s}); true zero onset ${session.zero_onset}; ` +
    (mean == null ? "no constant-current phase" :
      `mean Delta ${mean.toFixed(3)} A (expected ${expect == null ? "n/a" : expect.toFixed(3)} A)`));
  plot(document.getElementById("delta"), mean == null ? [] : [
    { values: r.delta, color: "#6a1b9a", width: 1 },
    { values: r.delta.map(() => mean), color: "#e65100" },
  ]);
  features();
}

function features() {
  const r = JSON.parse(session_features(session.current, session.pilot, val.n_avg, val.epsilon, val.t_max, val.zeta));
  const box = document.getElementById("feats");
  if (r.error) {
    box.textContent = r.error;
    return;
  }
  const rows = r.map((f) => `<tr><td>${f.name}</td><td>${Number.isInteger(f.value) ? f.value : f.value.toPrecision(6)}</td></tr>`);
  box.innerHTML = `<table>${rows.join("")}</table>`;
}

await init();
sliders("vehicle", vehicle, simulate);
sliders("extraction", extraction, extract);
simulate();
