import { ServiceClient, ServiceError } from './api.js';
import { startApp } from './app.js';

const DEFAULT_SERVICE = 'http://127.0.0.1:8765';

function serviceBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('service');
  return (fromQuery ?? DEFAULT_SERVICE).replace(/\/$/, '');
}

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  const status = document.getElementById('status');
  if (!root || !status) return;

  const base = serviceBase();
  status.textContent = `service: ${base}`;
  const client = new ServiceClient(base);

  try {
    const defaults = await client.defaults();
    if (defaults.script == null || defaults.notebook == null) {
      status.textContent =
        'The service has no preloaded notebook; start it with `moon serve <script> <notebook>`.';
      return;
    }
    await startApp(base, root);
  } catch (error) {
    status.textContent =
      error instanceof ServiceError
        ? `service error: ${error.message}`
        : `cannot reach ${base} — is \`moon serve\` running?`;
  }
}

void boot();
