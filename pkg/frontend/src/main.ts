// Application shell. One tab per workflow step; each annotate tab
// pulls the oldest open task at its stage and mounts the matching
// view. The solve tab drains the machine stage so verification always
// has poses to look at.

import { ApiClient } from './api.js';
import { StatusLine, clear, el } from './dom.js';
import { UiSession } from './session.js';
import { Stage } from './types.js';
import { createCandidateView } from './views/candidates.js';
import { createCorrespondenceView } from './views/correspond.js';
import { createTrackDrawingView } from './views/track.js';
import { createVerificationView } from './views/verify.js';

type TabSpec = {
  label: string;
  stage: Stage | null;
};

const TABS: TabSpec[] = [
  { label: 'Draw track', stage: null },
  { label: 'Pick model', stage: 'TRACKED' },
  { label: 'Match points', stage: 'CAD_SELECTED' },
  { label: 'Run solves', stage: 'CORRESPONDED' },
  { label: 'Verify', stage: 'POSED' },
];

function config(): { apiUrl: string; annotatorId: string } {
  const params = new URLSearchParams(window.location.search);
  return {
    apiUrl: params.get('api') ?? 'http://127.0.0.1:8000',
    annotatorId: params.get('annotator') ?? 'anonymous',
  };
}

function start(): void {
  const { apiUrl, annotatorId } = config();
  const api = new ApiClient(apiUrl);
  const session = new UiSession(api, annotatorId);

  const root = document.getElementById('app');
  if (!root) {
    throw new Error('missing #app container');
  }
  const status = new StatusLine('status-line global');
  const tabsRow = el('div', { class: 'tabs' });
  const content = el('div', { class: 'content' });
  root.append(
    el('header', {}, [
      el('strong', { text: 'cadkit annotation' }),
      el('span', { class: 'meta', text: ` ${apiUrl}  annotator: ${annotatorId}` }),
    ]),
    tabsRow,
    status.el,
    content,
  );

  TABS.forEach((tab) => {
    const btn = el('button', { class: 'tab', text: tab.label });
    btn.addEventListener('click', () => void openTab(tab, btn));
    tabsRow.append(btn);
  });

  async function openTab(tab: TabSpec, btn: HTMLElement): Promise<void> {
    for (const other of Array.from(tabsRow.children)) {
      other.classList.toggle('active', other === btn);
    }
    clear(content);
    try {
      if (tab.stage === null) {
        content.append(await createTrackDrawingView(session, onViewDone(tab)));
      } else if (tab.stage === 'CORRESPONDED') {
        await drainSolves();
      } else {
        const task = await session.loadNext(tab.stage);
        if (task === null) {
          content.append(el('p', { text: `no open tasks at ${tab.stage}` }));
          return;
        }
        const view = tab.stage === 'TRACKED'
          ? await createCandidateView(session, task, onViewDone(tab))
          : tab.stage === 'CAD_SELECTED'
            ? await createCorrespondenceView(session, task, onViewDone(tab))
            : await createVerificationView(session, task, onViewDone(tab));
        content.append(view);
      }
    } catch (err) {
      content.append(el('p', { class: 'error', text: String(err) }));
    }
  }

  function onViewDone(tab: TabSpec) {
    return (summary: string) => {
      status.show(summary, 'info', 6000);
      clear(content);
      content.append(
        el('p', { text: summary }),
        buildNextButton(tab),
      );
    };
  }

  function buildNextButton(tab: TabSpec): HTMLElement {
    const btn = el('button', { text: 'Next task' });
    btn.addEventListener('click', () => {
      const tabBtn = Array.from(tabsRow.children)[TABS.indexOf(tab)] as HTMLElement;
      void openTab(tab, tabBtn);
    });
    return btn;
  }

  async function drainSolves(): Promise<void> {
    const log = el('div', { class: 'solve-log' });
    content.append(el('h2', { text: 'Running queued solves' }), log);
    let solved = 0;
    for (;;) {
      const task = await session.loadNext('CORRESPONDED');
      if (task === null) {
        break;
      }
      log.append(el('p', { text: `solving ${task.track_id} ...` }));
      const outcome = await session.submitWithRetry({ kind: 'solve' });
      if (outcome.status === 'conflict') {
        log.append(el('p', { text: `  skipped, advanced elsewhere (${outcome.task.stage})` }));
        continue;
      }
      solved += 1;
      log.append(el('p', { text: `  done, now ${outcome.task.stage}` }));
    }
    log.append(el('p', { text: `queue empty, ${solved} solves ran` }));
  }
}

window.addEventListener('DOMContentLoaded', start);
