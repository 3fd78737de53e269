import { SessionApi } from './api';
import { SessionController } from './app';
import { renderApp } from './render';

const root = document.getElementById('app');
if (root === null) throw new Error('missing #app container');

const controller = new SessionController(new SessionApi(''), (state) => {
  root.innerHTML = renderApp(state);
});

root.addEventListener('click', (event) => {
  const target = (event.target as HTMLElement).closest('[data-action]');
  if (!(target instanceof HTMLElement)) return;
  const action = target.dataset.action;
  if (action === 'toggle') {
    void controller.toggleFinding(target.dataset.variable!, target.dataset.state!);
  } else if (action === 'retract') {
    void controller.retractFinding(target.dataset.finding!);
  } else if (action === 'clear-hypothesis') {
    void controller.clearHypothesis();
  }
});

root.addEventListener('submit', (event) => {
  const form = event.target as HTMLFormElement;
  event.preventDefault();
  if (form.dataset.role === 'hypothesis-form') {
    const value = (form.elements.namedItem('assignment') as HTMLSelectElement).value;
    const [variable, state] = value.split('=');
    void controller.setHypothesis({ [variable]: state });
  } else if (form.dataset.role === 'whatif-form') {
    const value = (form.elements.namedItem('swap') as HTMLSelectElement).value;
    const [findingId, state] = value.split(':');
    void controller.runWhatIf(findingId, state);
  }
});

const params = new URLSearchParams(window.location.search);
void controller.loadModel(params.get('model') ?? 'chain3');
