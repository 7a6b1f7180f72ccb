// DOM wiring for the survey page. Renders the controller's state into
// #survey-root: the text under review, two bar groups (exactly as served,
// A left / B right), the three choice buttons, and a progress counter.

import { Choice, ItemPayload } from './api.js';
import { SurveyController, State } from './controller.js';
import { percentRow, progressText } from './format.js';

const CHOICE_LABELS: [Choice, string][] = [
  ['A', 'Prefer A'],
  ['no_difference', 'No difference'],
  ['B', 'Prefer B'],
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBars(title: string, labels: string[], dist: number[]): HTMLElement {
  const group = el('div', 'bar-group');
  group.appendChild(el('h3', undefined, title));
  const percents = percentRow(dist);
  labels.forEach((label, i) => {
    const row = el('div', 'bar-row');
    row.appendChild(el('span', 'bar-label', label));
    const track = el('div', 'bar-track');
    const fill = el('div', 'bar-fill');
    fill.style.width = percents[i];
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el('span', 'bar-value', percents[i]));
    group.appendChild(row);
  });
  return group;
}

function renderItem(root: HTMLElement, payload: ItemPayload, controller: SurveyController): void {
  root.replaceChildren();
  root.appendChild(
    el('p', 'progress', progressText(payload.progress.answered, payload.progress.total)),
  );
  root.appendChild(el('blockquote', 'sample-text', payload.text));
  const pair = el('div', 'pair');
  pair.appendChild(renderBars('Annotation A', payload.labels, payload.dist_A));
  pair.appendChild(renderBars('Annotation B', payload.labels, payload.dist_B));
  root.appendChild(pair);
  root.appendChild(el('p', undefined, 'Which annotation do you find more reasonable?'));
  const buttons = el('div', 'choices');
  for (const [choice, label] of CHOICE_LABELS) {
    const button = el('button', 'choice', label);
    button.addEventListener('click', () => {
      buttons.querySelectorAll('button').forEach((b) => (b.disabled = true));
      void controller.submit(choice);
    });
    buttons.appendChild(button);
  }
  root.appendChild(buttons);
}

function render(root: HTMLElement, state: State, controller: SurveyController): void {
  switch (state.kind) {
    case 'loading':
      root.replaceChildren(el('p', undefined, 'Loading…'));
      break;
    case 'item':
      renderItem(root, state.payload, controller);
      break;
    case 'done': {
      root.replaceChildren();
      root.appendChild(el('h2', undefined, 'All done — thank you!'));
      root.appendChild(el('p', undefined, `You answered ${state.answered} items.`));
      break;
    }
    case 'error': {
      root.replaceChildren();
      root.appendChild(el('p', 'error', state.message));
      const retry = el('button', 'choice', 'Retry');
      retry.addEventListener('click', () => void controller.load());
      root.appendChild(retry);
      break;
    }
  }
}

function participantToken(): string {
  const key = 'survey-participant';
  let token = localStorage.getItem(key);
  if (!token) {
    token = `p-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 8)}`;
    localStorage.setItem(key, token);
  }
  return token;
}

export function start(): void {
  const root = document.getElementById('survey-root');
  if (!root) throw new Error('missing #survey-root');
  const controller: SurveyController = new SurveyController('', participantToken(), (state) =>
    render(root, state, controller),
  );
  void controller.load();
}

start();
