// DOM rendering: one render(model) pass rebuilds the dynamic regions.
// The layout is simple enough that full re-render stays far inside the
// 200 ms update budget; bursts are coalesced by the rAF scheduling in
// main.ts (at most one outstanding render per animation tick).

import { ConsoleModel, buttonsEnabled } from "./model.js";
import { StateSnapshot } from "./protocol.js";

export interface ViewCallbacks {
  onBehavior: (label: string) => void;
  onParentToggle: (joined: boolean) => void;
}

export function buildSkeleton(root: HTMLElement): void {
  root.innerHTML = `
    <header>
      <h1>Observer console</h1>
      <span id="connection" class="pill"></span>
      <span id="scenario" class="pill"></span>
      <span id="clock" class="pill"></span>
    </header>
    <div id="banner" class="banner" hidden></div>
    <main>
      <section id="state-panel" class="panel">
        <h2>Session state</h2>
        <dl id="state-fields"></dl>
        <div id="plan-box"></div>
      </section>
      <section id="buttons-panel" class="panel">
        <h2>Baby behaviors</h2>
        <label class="parent-toggle">
          <input type="checkbox" id="parent-toggle" /> parent joined
        </label>
        <div id="button-grid"></div>
      </section>
      <section id="log-panel" class="panel">
        <h2>Event log</h2>
        <ul id="event-log"></ul>
      </section>
    </main>
  `;
}

export function bindControls(root: HTMLElement, callbacks: ViewCallbacks): void {
  const grid = root.querySelector<HTMLElement>("#button-grid");
  grid?.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const label = target?.dataset?.label;
    if (label) callbacks.onBehavior(label);
  });
  const toggle = root.querySelector<HTMLInputElement>("#parent-toggle");
  toggle?.addEventListener("change", () => callbacks.onParentToggle(!!toggle.checked));
}

export function render(model: ConsoleModel, root: HTMLElement): void {
  text(root, "#connection", model.connection);
  text(root, "#scenario", model.scenario ? `session: ${model.scenario}` : "no session");
  text(root, "#clock", model.state ? `t = ${(model.state.clock / 1000).toFixed(1)} s` : "t = –");

  const banner = root.querySelector<HTMLElement>("#banner");
  if (banner) {
    banner.hidden = model.banner === null;
    banner.textContent = model.banner ?? "";
  }

  renderState(model.state, root);
  renderButtons(model, root);
  renderLog(model, root);
}

function renderState(state: StateSnapshot | null, root: HTMLElement): void {
  const fields = root.querySelector<HTMLElement>("#state-fields");
  const planBox = root.querySelector<HTMLElement>("#plan-box");
  if (!fields || !planBox) return;
  if (!state) {
    fields.innerHTML = "<dt>waiting for state…</dt>";
    planBox.innerHTML = "";
    return;
  }
  const rhymeUnit = state.rhyme_unit
    ? `${state.rhyme_unit.gloss} (${state.rhyme_unit.prime}, ` +
      `${state.rhyme_unit.index + 1}/${state.rhyme_unit.total})`
    : "–";
  const rows: [string, string][] = [
    ["AOI", state.fixated ? `${state.aoi} (fixated)` : state.aoi],
    ["readiness", state.readiness],
    ["episode", state.episode_rhyme ? `${state.episode} · ${state.episode_rhyme}` : state.episode],
    ["sign unit", rhymeUnit],
    ["avatar", `${state.avatar.status}${state.avatar.behavior ? ": " + state.avatar.behavior : ""}`],
    ["robot", `${state.robot.status}${state.robot.behavior ? ": " + state.robot.behavior : ""}`],
    ["last behavior", state.last_behavior
      ? `${state.last_behavior.label} [${state.last_behavior.origin}]`
      : "–"],
    ["parent joined", state.parent_joined ? "yes" : "no"],
  ];
  fields.innerHTML = rows
    .map(([k, v]) => `<dt>${esc(k)}</dt><dd>${esc(v)}</dd>`)
    .join("");

  if (state.active_plan) {
    const plan = state.active_plan;
    const steps = plan.steps
      .map((s, i) => {
        const mark = plan.terminal[i] ? "done" : i < plan.cursor ? "running" : "pending";
        return `<li class="${mark}">${esc(s.agent)}: ${esc(s.behavior)}</li>`;
      })
      .join("");
    planBox.innerHTML = `
      <h3>plan ${esc(plan.id)} <small>(${esc(plan.provenance)})</small></h3>
      <ol class="plan-steps">${steps}</ol>
    `;
  } else {
    planBox.innerHTML = "<h3>no active plan</h3>";
  }
}

function renderButtons(model: ConsoleModel, root: HTMLElement): void {
  const grid = root.querySelector<HTMLElement>("#button-grid");
  if (!grid) return;
  const enabled = buttonsEnabled(model);
  const wanted = JSON.stringify([model.categories, enabled, model.flash]);
  if (grid.dataset.rendered === wanted) return;
  grid.dataset.rendered = wanted;
  grid.innerHTML = Object.entries(model.categories)
    .map(([category, labels]) => {
      const buttons = labels
        .map(
          (label) =>
            `<button data-label="${esc(label)}" ${enabled ? "" : "disabled"}
              class="${model.flash === label ? "flash" : ""}">${esc(label)}</button>`,
        )
        .join("");
      return `<fieldset><legend>${esc(category)}</legend>${buttons}</fieldset>`;
    })
    .join("");
}

function renderLog(model: ConsoleModel, root: HTMLElement): void {
  const list = root.querySelector<HTMLElement>("#event-log");
  if (!list) return;
  const recent = model.log.slice(-40).reverse();
  list.innerHTML = recent
    .map((e) => {
      const origin = e.origin ? ` <em>[${esc(e.origin)}]</em>` : "";
      return `<li><span class="t">${(e.t / 1000).toFixed(1)}s</span> ${esc(e.text)}${origin}</li>`;
    })
    .join("");
}

function text(root: HTMLElement, selector: string, value: string): void {
  const el = root.querySelector<HTMLElement>(selector);
  if (el) el.textContent = value;
}

function esc(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
