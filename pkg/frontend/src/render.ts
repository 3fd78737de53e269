import type { AppState } from './app';
import type { SensitivityDoc, SessionView, TreeDoc, WhatIfDoc } from './types';

/**
 * Pure HTML renderers.  Every probability shown on screen is the verbatim
 * string of a number taken from a service response (`num`), never a value
 * computed here; bar widths are styling only.
 */

export const num = (value: number): string => String(value);

export const esc = (text: string): string =>
  text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');

const bar = (value: number): string =>
  `<span class="bar"><span class="bar-fill" style="width:${Math.round(value * 100)}%"></span></span>`;

export function renderBanner(state: AppState): string {
  if (state.banner === null) return '';
  return `<div class="banner" role="alert">${esc(state.banner)}</div>`;
}

export function renderVariables(view: SessionView): string {
  const findingIds = new Set(view.findings.map((f) => f.id));
  const rows = view.variables
    .map((variable) => {
      const marginal = view.marginals[variable.name];
      const states = variable.states
        .map((stateLabel, i) => {
          const id = `${variable.name}=${stateLabel}`;
          const active = findingIds.has(id) ? ' active' : '';
          const p = marginal ? marginal.probabilities[i] : null;
          const shown = p === null ? '–' : num(p);
          const fill = p === null ? '' : bar(p);
          return (
            `<button class="state${active}" data-action="toggle" ` +
            `data-variable="${esc(variable.name)}" data-state="${esc(stateLabel)}">` +
            `<span class="state-label">${esc(stateLabel)}</span>${fill}` +
            `<span class="prob" data-var="${esc(variable.name)}" data-state="${esc(
              stateLabel,
            )}">${shown}</span></button>`
          );
        })
        .join('');
      return `<div class="variable"><h3>${esc(variable.name)}</h3>${states}</div>`;
    })
    .join('');
  return `<section class="panel variables"><h2>Variables</h2>${rows}</section>`;
}

export function renderFindings(view: SessionView): string {
  if (view.findings.length === 0) {
    return '<section class="panel findings"><h2>Findings</h2><p class="hint">click a state to enter it as evidence</p></section>';
  }
  const chips = view.findings
    .map(
      (f) =>
        `<span class="chip">${esc(f.id)}<button data-action="retract" ` +
        `data-finding="${esc(f.id)}" title="retract">×</button></span>`,
    )
    .join('');
  return `<section class="panel findings"><h2>Findings</h2>${chips}</section>`;
}

export function renderConflict(view: SessionView): string {
  let body: string;
  if (view.conflict === null) {
    body = '<p class="hint">enter at least one finding</p>';
  } else {
    const conf = view.conflict.conf;
    const tone = conf > 0 ? 'conf-positive' : 'conf-negative';
    const note = conf > 0 ? 'possible conflict' : 'no conflict indicated';
    const parts = view.conflict.partition_conflicts
      .map(
        (p) =>
          `<tr><td>${esc(p.part.join(', '))}</td><td>vs rest</td>` +
          `<td class="number">${num(p.conf)}</td></tr>`,
      )
      .join('');
    body =
      `<p class="conf-value ${tone}" data-role="conf">${num(conf)}</p>` +
      `<p class="hint">${note}</p>` +
      (parts ? `<table class="mini"><tbody>${parts}</tbody></table>` : '');
  }
  return `<section class="panel conflict"><h2>Conflict</h2>${body}</section>`;
}

export function renderHypothesis(view: SessionView): string {
  const options = view.variables
    .map((v) =>
      v.states
        .map((s) => `<option value="${esc(v.name)}=${esc(s)}">${esc(v.name)} = ${esc(s)}</option>`)
        .join(''),
    )
    .join('');
  const selector =
    `<form data-role="hypothesis-form"><select name="assignment">${options}</select>` +
    '<button type="submit">set hypothesis</button></form>';
  if (view.hypothesis === null) {
    return `<section class="panel hypothesis"><h2>Hypothesis</h2>${selector}</section>`;
  }
  const pairs = Object.entries(view.hypothesis.assignments)
    .map(([v, s]) => `${esc(v)} = ${esc(s)}`)
    .join(', ');
  const pH = view.hypothesis.p_h === null ? '–' : num(view.hypothesis.p_h);
  const pHe = view.hypothesis.p_h_given_e === null ? '–' : num(view.hypothesis.p_h_given_e);
  return (
    `<section class="panel hypothesis"><h2>Hypothesis</h2>` +
    `<p><strong>${pairs}</strong> <button data-action="clear-hypothesis">clear</button></p>` +
    `<p>P(h) = <span class="prob" data-role="p-h">${pH}</span></p>` +
    `<p>P(h | e) = <span class="prob" data-role="p-h-given-e">${pHe}</span></p>` +
    selector +
    `</section>`
  );
}

const flag = (on: boolean | null, label: string): string => {
  if (on === null) return `<span class="flag unknown" title="complement not accessible">${label}?</span>`;
  return on ? `<span class="flag on">${label}</span>` : '';
};

export function renderSensitivity(doc: SensitivityDoc | null, view: SessionView): string {
  if (view.hypothesis === null) {
    return '<section class="panel sensitivity"><h2>Sensitivity</h2><p class="hint">set a hypothesis first</p></section>';
  }
  if (doc === null) {
    return '<section class="panel sensitivity"><h2>Sensitivity</h2><p class="hint">enter findings to classify</p></section>';
  }
  const rows = doc.subsets
    .map((row) => {
      const name = row.findings.length === 0 ? '∅' : row.findings.join(', ');
      return (
        `<tr><td>${esc(name)}</td>` +
        `<td class="number">${num(row.p)}</td>` +
        `<td class="number">${num(row.p_h_given)}</td>` +
        `<td class="number">${num(row.sufficiency_ratio)}</td>` +
        `<td>${flag(row.sufficient, 'sufficient')}${flag(
          row.minimal_sufficient,
          'minimal',
        )}${flag(row.decisive, 'decisive')}${flag(row.important, 'important')}</td></tr>`
      );
    })
    .join('');
  const crucial =
    doc.crucial_findings.length > 0
      ? `<p>crucial findings: <strong>${esc(doc.crucial_findings.join(', '))}</strong></p>`
      : '<p class="hint">no crucial finding</p>';
  return (
    '<section class="panel sensitivity"><h2>Sensitivity</h2>' +
    '<table><thead><tr><th>subset</th><th>P(e′)</th><th>P(h|e′)</th>' +
    '<th>ratio</th><th>flags</th></tr></thead>' +
    `<tbody>${rows}</tbody></table>${crucial}</section>`
  );
}

export function renderWhatIf(state: AppState, view: SessionView): string {
  if (view.findings.length === 0) {
    return '<section class="panel whatif"><h2>What if?</h2><p class="hint">enter a finding to swap</p></section>';
  }
  const byName = new Map(view.variables.map((v) => [v.name, v]));
  const stateOptions = view.findings
    .flatMap((f) => (byName.get(f.variable)?.states ?? []).map((s) => [f.id, s] as const))
    .map(([fid, s]) => `<option value="${esc(fid)}:${esc(s)}">${esc(fid)} → ${esc(s)}</option>`)
    .join('');
  const form =
    `<form data-role="whatif-form"><select name="swap">${stateOptions}</select>` +
    `<button type="submit">ask</button></form>`;
  let result = '';
  const answer = state.whatIf.answer;
  if (state.whatIf.error !== null) {
    result = `<p class="banner">${esc(state.whatIf.error)}</p>`;
  } else if (answer !== null) {
    result = renderWhatIfAnswer(answer);
  }
  return `<section class="panel whatif"><h2>What if?</h2>${form}${result}</section>`;
}

export function renderWhatIfAnswer(answer: WhatIfDoc): string {
  const badge = answer.propagation_free
    ? `<span class="badge free" data-role="no-propagation">no propagation · Δmessages = ${String(
        answer.messages_sent_delta,
      )}</span>`
    : '<span class="badge">repropagated</span>';
  const posterior =
    answer.p_h_given_swapped === null
      ? ''
      : `<p>P(h | swapped e) = <span class="prob" data-role="whatif-posterior">${num(
          answer.p_h_given_swapped,
        )}</span></p>`;
  return (
    `<div class="whatif-answer">` +
    `<p>${esc(answer.finding_id)} → swapped: P = <span class="prob" data-role="whatif-p">${num(
      answer.p_swapped,
    )}</span> (was <span class="prob">${num(answer.p_e)}</span>)</p>` +
    posterior +
    badge +
    `</div>`
  );
}

export function renderTree(tree: TreeDoc | null): string {
  if (tree === null) return '';
  const cliques = tree.cliques
    .map(
      (c) =>
        `<span class="clique${c.index === tree.root ? ' root' : ''}">` +
        `${esc(c.variables.join(' '))}</span>`,
    )
    .join('');
  const separators = tree.separators
    .map(
      (s) =>
        `<li>${s.between[0]} —[${esc(s.variables.join(' '))}]— ${s.between[1]}</li>`,
    )
    .join('');
  return (
    '<section class="panel tree"><h2>Junction tree</h2>' +
    `<div class="cliques">${cliques}</div><ul class="separators">${separators}</ul></section>`
  );
}

export function renderApp(state: AppState): string {
  const banner = renderBanner(state);
  if (state.view === null) {
    return `${banner}<p class="hint">load a model to begin</p>`;
  }
  const view = state.view;
  const pe = `<p class="pe">P(e) = <span class="prob" data-role="p-e">${num(view.p_e)}</span></p>`;
  return (
    banner +
    `<header><h1>${esc(view.model)}</h1>${pe}${state.busy ? '<span class="busy">…</span>' : ''}</header>` +
    renderVariables(view) +
    renderFindings(view) +
    renderConflict(view) +
    renderHypothesis(view) +
    renderSensitivity(state.sensitivity, view) +
    renderWhatIf(state, view) +
    renderTree(state.tree)
  );
}
