import init, { shatter_witness, separate, refute } from "./pkg/ellipsoid_vc_web.js";

const canvas = document.getElementById("plane");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const controls = document.getElementById("controls");

const SCALE = 110;
const toScreen = ([x, y]) => [canvas.width / 2 + SCALE * x, canvas.height / 2 - SCALE * y];
const toPlane = (sx, sy) => [(sx - canvas.width / 2) / SCALE, (canvas.height / 2 - sy) / SCALE];

let mode = "witness";
let points = [];
let labels = 0;
let ellipse = null;
let seed = 0;
let witness = null;

function drawEllipse(e) {
  // Boundary of (x - c)^T A (x - c) = 1, traced through A^{-1/2}.
  const [[a, b], [, c]] = e.matrix;
  const tr = a + c, det = a * c - b * b;
  const disc = Math.sqrt(Math.max(tr * tr / 4 - det, 0));
  const l1 = tr / 2 + disc, l2 = tr / 2 - disc;
  if (!(l2 > 0)) return;
  const theta = Math.abs(b) < 1e-15 ? (a >= c ? 0 : Math.PI / 2) : Math.atan2(l1 - a, b);
  const [cx, cy] = toScreen(e.center);
  ctx.beginPath();
  ctx.ellipse(cx, cy, SCALE / Math.sqrt(l1), SCALE / Math.sqrt(l2), -theta, 0, 2 * Math.PI);
  ctx.fillStyle = "rgba(40, 120, 220, 0.15)";
  ctx.fill();
  ctx.strokeStyle = "#2878dc";
  ctx.stroke();
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, canvas.height / 2); ctx.lineTo(canvas.width, canvas.height / 2);
  ctx.moveTo(canvas.width / 2, 0); ctx.lineTo(canvas.width / 2, canvas.height);
  ctx.stroke();
  if (ellipse) drawEllipse(ellipse);
  points.forEach((p, i) => {
    const [sx, sy] = toScreen(p);
    ctx.beginPath();
    ctx.arc(sx, sy, 6, 0, 2 * Math.PI);
    ctx.fillStyle = labels & (1 << i) ? "#d33" : "#fff";
    ctx.fill();
    ctx.strokeStyle = "#222";
    ctx.stroke();
    ctx.fillStyle = "#222";
    ctx.fillText(String(i), sx + 8, sy - 8);
  });
}

function call(f) {
  try {
    return JSON.parse(f());
  } catch (e) {
    status.textContent = "error: " + e;
    return null;
  }
}

function loadWitness() {
  witness = call(() => shatter_witness(seed));
  if (!witness) return;
  points = witness.points;
  showSubset();
}

function showSubset() {
  ellipse = labels === 0 ? null : witness.ellipses[labels];
  status.textContent = `seed ${seed}, subset mask ${labels}, delta ${witness.delta.toExponential(3)}`;
  draw();
}

function runOracle() {
  ellipse = null;
  if (points.length === 0) { status.textContent = "click to add points"; draw(); return; }
  const r = call(() => separate(new Float64Array(points.flat()), labels));
  if (r) {
    ellipse = r.ellipse;
    status.textContent = r.realizable
      ? `realizable, margin ${r.margin.toExponential(3)}`
      : `not realizable, LP value ${r.margin.toExponential(3)}`;
  }
  draw();
}

function runRefute() {
  ellipse = null;
  labels = 0;
  if (points.length < 6) {
    status.textContent = `place ${6 - points.length} more point(s)`;
  } else {
    const r = call(() => refute(new Float64Array(points.flat())));
    if (r) {
      labels = r.labeling;
      status.textContent = `no ellipse cuts out the red points (${r.kind}, LP value ${r.margin.toExponential(3)})`;
    }
  }
  draw();
}

function nearest(p) {
  let best = -1, bd = 0.1;
  points.forEach((q, i) => {
    const d = Math.hypot(p[0] - q[0], p[1] - q[1]);
    if (d < bd) { bd = d; best = i; }
  });
  return best;
}

canvas.addEventListener("click", (ev) => {
  const r = canvas.getBoundingClientRect();
  const p = toPlane(ev.clientX - r.left, ev.clientY - r.top);
  const hit = nearest(p);
  if (mode === "witness") {
    if (hit >= 0) { labels ^= 1 << hit; showSubset(); }
  } else if (mode === "oracle") {
    if (hit >= 0) labels ^= 1 << hit;
    else if (points.length < 20) points.push(p);
    runOracle();
  } else {
    if (hit < 0 && points.length < 6) points.push(p);
    runRefute();
  }
});

function button(text, onclick) {
  const b = document.createElement("button");
  b.textContent = text;
  b.onclick = onclick;
  controls.appendChild(b);
}

function setMode(m) {
  mode = m;
  points = [];
  labels = 0;
  ellipse = null;
  controls.replaceChildren();
  if (m === "witness") {
    button("New seed", () => { seed += 1; labels = 0; loadWitness(); });
    loadWitness();
    return;
  }
  button("Clear", () => setMode(m));
  if (m === "oracle") runOracle(); else runRefute();
}

document.querySelectorAll("input[name=mode]").forEach((r) =>
  r.addEventListener("change", () => setMode(r.value)));

await init();
setMode("witness");
