import { Api, AspectInfo, EntityInfo } from './api';
import {
  displayedSentences,
  renderAspectToggles,
  renderEntityList,
  renderMessage,
  renderSummary,
} from './render';
import { SummaryStore, ViewState } from './state';

const SERVICE_URL =
  new URLSearchParams(window.location.search).get('service') ??
  'http://127.0.0.1:8080';

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing #${id}`);
  }
  return el;
}

async function bootstrap(): Promise<void> {
  const api = new Api(SERVICE_URL);
  const entityPane = byId('entity-pane');
  const togglePane = byId('toggle-pane');
  const summaryPane = byId('summary-pane');

  let entities: EntityInfo[] = [];
  let aspects: AspectInfo[] = [];

  const store = new SummaryStore(api, (state: ViewState) => {
    entityPane.innerHTML = renderEntityList(entities, state.entityId);
    togglePane.innerHTML = renderAspectToggles(aspects, state.selection);
    if (state.inFlight) {
      summaryPane.innerHTML = renderMessage('loading…');
    } else if (state.response !== null) {
      const html = renderSummary(state.response);
      // belt and braces: what we show is exactly what the service sent
      const shown = displayedSentences(html);
      const sent = state.response.sentences.map((s) => s.text);
      if (JSON.stringify(shown) !== JSON.stringify(sent)) {
        throw new Error('rendered sentences diverge from the response');
      }
      summaryPane.innerHTML = html;
    } else {
      summaryPane.innerHTML = renderMessage(state.message ?? '');
    }
  });

  entityPane.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const entityId = target.dataset.entity;
    if (entityId !== undefined) {
      void store.selectEntity(entityId);
    }
  });
  togglePane.addEventListener('change', (event) => {
    const target = event.target as HTMLInputElement;
    const aspect = target.dataset.aspect;
    if (aspect !== undefined) {
      void store.toggle(aspect);
    }
  });

  try {
    [{ entities }, { aspects }] = await Promise.all([
      api.entities(),
      api.aspects(),
    ]);
  } catch (err) {
    summaryPane.innerHTML = renderMessage(
      `service unreachable at ${SERVICE_URL}: ${String(err)}`,
    );
    return;
  }
  // start with every aspect on: the general summary
  if (entities.length > 0) {
    await store.setSelection(aspects.map((a) => a.name));
    await store.selectEntity(entities[0].entity_id);
  }
}

void bootstrap();
